#ifndef OPTOMECH_NOISEBUDGET_HPP
#define OPTOMECH_NOISEBUDGET_HPP

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "optomech/config.hpp"
#include "optomech/model.hpp"

namespace optomech {

// Force-noise power spectral densities. All values handled here are
// double-sided (N^2/Hz); exports convert to single-sided amplitude densities
// as sqrt(2*PSD).

// Quantum back-action of the intracavity photon number fluctuation.
// Frequency flat: S = 2*n_circ*hbar^2*g^2/kappa.
double qba_psd(double n_circ, const CavityParams& cavity);

// Classical back-action driven by input intensity noise, expressed through
// the shot-noise ratio b: S_c = (4*kappa_in/kappa)*b^2*S_qba.
double classical_ba_psd(double n_circ, const CavityParams& cavity, double b);

// Suspension thermal force noise, 4*k_B*T*m*gamma(omega) with the damping
// rate depending on the dissipation model.
double thermal_psd(const MechanicalParams& mech, double omega);

// Back-action from laser phase noise leaking through the detuned cavity:
// S_phase = s_ffc * 2*Delta*omega_eff*delta_phi/(kappa^2+Delta^2).
double phase_ba_psd(const CavityParams& cavity, double omega_eff, double delta_phi,
                    double s_ffc);

// Sensing (readout) noise referred to force: flat displacement-like floor
// whose force ASD rises as f^1 through the anchor point, so the PSD goes as
// f^2. anchor_level is the single-sided force ASD at anchor_f_hz.
double sensing_psd(double anchor_level, double anchor_f_hz, double omega);

struct NoiseBudget {
  std::vector<double> grid_hz;
  // source name -> double-sided force PSD per bin, N^2/Hz
  std::map<std::string, std::vector<double>> per_source;
  std::vector<double> total;   // exact per-bin sum of per_source
  nlohmann::json metadata;     // parameter snapshot and derived figures

  double s_qba = 0.0;          // flat double-sided QBA level
  MechanicalParams mech;       // snapshot used by ratio_at

  // Quantum back-action to thermal force ratio at an arbitrary frequency.
  double ratio_at(double f_hz) const;
};

// Evaluates all five sources on the grid. Source failures are rethrown with
// the source name attached.
NoiseBudget build_budget(const ExperimentConfig& config, const std::vector<double>& grid_hz);

// The back-action-to-thermal ratio in its published closed form, with the
// vacuum coupling g0^2 = g^2*hbar/(2*m*omega) and the thermal occupation
// evaluated at the analysis frequency. Agrees with direct S_q/S_th division.
double ratio_published_form(const CavityParams& cavity, const MechanicalParams& mech,
                            double n_circ, double f_hz, bool exact_occupation);

struct PowerPoint {
  double p_in;          // W
  // single-sided force ASDs, N/sqrt(Hz), at the probe frequency
  double asd_qba = 0.0;
  double asd_classical = 0.0;
  double asd_thermal = 0.0;
  double asd_sensing = 0.0;
  double asd_phase = 0.0;
  double asd_total = 0.0;
};

struct PowerDependence {
  std::vector<PowerPoint> points;
  double frequency_hz = 0.0;
  // Input powers where the flat QBA PSD crosses the thermal floor and where
  // the classical back-action overtakes the QBA.
  double crossover_qba_thermal_w = 0.0;
  double crossover_qba_classical_w = 0.0;
  // One-sided PSD decomposition S1(P) = c0 + c1*P + c2*P^2 of the total,
  // excluding the phase term (zero on resonance where this is used).
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

// Total-force decomposition versus input power at a fixed frequency.
PowerDependence power_dependence(const ExperimentConfig& config,
                                 const std::vector<double>& p_list_w, double f_hz);

} // namespace optomech

#endif
