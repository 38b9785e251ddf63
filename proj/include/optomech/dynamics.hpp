#ifndef OPTOMECH_DYNAMICS_HPP
#define OPTOMECH_DYNAMICS_HPP

#include <complex>
#include <functional>
#include <vector>

#include "optomech/model.hpp"
#include "optomech/spectral.hpp"
#include "optomech/units.hpp"

namespace optomech {

using cplx = std::complex<double>;

struct singular_loop_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct assumption_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct calibration_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A transfer block: complex response of angular frequency with semantic
// input/output units. Blocks chain in series with unit checking.
struct FrequencyResponse {
  std::function<cplx(double)> eval;
  Unit units_in;
  Unit units_out;

  cplx operator()(double omega) const { return eval(omega); }
  bool dimensionless() const { return units_in == units_out; }
  Unit unit_ratio() const { return units_out / units_in; }

  // Series composition: this block feeds `next`. Units must match.
  FrequencyResponse then(const FrequencyResponse& next) const;

  static FrequencyResponse flat(cplx value, const std::string& units_in,
                                const std::string& units_out);
  // Rational response evaluated at s = i*omega: gain * prod(s-z)/prod(s-p).
  static FrequencyResponse zpk(std::vector<cplx> zeros, std::vector<cplx> poles,
                               double gain, const std::string& units_in,
                               const std::string& units_out);
  // Pure integrator with unity gain at omega_ug: H = omega_ug/(i*omega).
  static FrequencyResponse integrator(double omega_ug, const std::string& units_in,
                                      const std::string& units_out);
};

// Mechanical susceptibility x/F of a suspended mass (units m/N):
//   viscous:   1/(m(w_m^2 - w^2 + i*w*w_m/Q))
//   structure: 1/(m(w_m^2(1 + i/Q) - w^2))
cplx suspension_susceptibility(double mass, double omega_m, double quality_factor,
                               DampingModel damping, double omega);
cplx mech_susceptibility(const MechanicalParams& mech, double omega);
FrequencyResponse susceptibility_response(double mass, double omega_m,
                                          double quality_factor, DampingModel damping);

struct OpticalSpring {
  double k_opt = 0.0;      // N/m
  double omega_eff = 0.0;  // rad/s
  bool stable = true;      // false when the anti-spring overwhelms gravity
};

// Quasi-static optical spring (bad-cavity limit):
//   K_opt = 2*hbar*g^2*N_circ*detuning/(kappa^2+detuning^2)
//   omega_eff = sqrt(omega_m^2 + K_opt/m)
// The mechanical parameters supply omega_m and the mass.
OpticalSpring optical_spring(const CavityParams& cavity, const MechanicalParams& mech,
                             double n_circ);

// The pendulum in the measurement loop. All seven blocks plus the sensing
// noise displacement PSD (double-sided, m^2/Hz) seen at the PDH input.
struct LoopModel {
  FrequencyResponse h_pend;   // N -> m
  FrequencyResponse h_c;      // N -> m (controlled mirror)
  FrequencyResponse h_opt;    // m -> N (optical spring, -K_opt)
  FrequencyResponse h_pdh;    // m -> V
  FrequencyResponse h_pd;     // V -> V
  FrequencyResponse h_servo;  // V -> V
  FrequencyResponse h_act;    // V -> N
  std::function<double(double)> n_s_psd;   // omega -> m^2/Hz
};

inline constexpr double k_singular_loop_tolerance = 1e-6;
inline constexpr double k_g2_negligible_limit = 0.1;

struct LoopGains {
  cplx g1;
  cplx g2;
};

// G1 = H_pend*H_opt, G2 = H_PDH*H_PD*H_servo*H_act*H_c. Both chains are
// required to be dimensionless; a unit mismatch anywhere throws unit_error.
LoopGains loop_gains(const LoopModel& loop, double omega);

struct Monitor1Transfer {
  cplx from_force;    // V/N
  cplx from_sensing;  // V/m
};

// Monitor1 (servo output) referred to the pendulum inputs:
//   from_force   = G2*H_pend/(H_c*H_act*(1-G1-G2))
//   from_sensing = from_force/H_c
// Throws singular_loop_error when |1-G1-G2| < k_singular_loop_tolerance.
Monitor1Transfer monitor1_transfer(const LoopModel& loop, double omega);

// Monitor3 (photodetector output) displacement gain H_PDH*H_PD, valid only
// while the feedback is negligible; throws assumption_error at |G2| >= 0.1.
cplx monitor3_transfer(const LoopModel& loop, double omega);

// Pendulum displacement response per unit force with the optical spring
// closed: H_pend/(1-G1).
cplx closed_pendulum_response(const LoopModel& loop, double omega);

// Generic node-by-node solution of the measurement loop used as an
// independent oracle for the closed-form monitor transfer functions, and as
// the place to study alternative sensing-noise injection points.
enum class Injection {
  force_on_pendulum,        // unit force added to delta_F
  sensing_displacement,     // unit displacement added at the PDH input
  sensing_equivalent_force, // unit sensing referred as force 1/H_c on the pendulum
};

struct LoopGraphSolution {
  cplx monitor1;       // servo output, V
  cplx monitor3;       // photodetector output, V
  cplx x_pend;         // m
  cplx x_c;            // m
  cplx x_cav;          // m
  cplx sensed_length;  // x_cav plus any injected sensing displacement, m
};

LoopGraphSolution solve_loop_graph(const LoopModel& loop, double omega,
                                   Injection injection);

// Pointwise ASD calibration: divides by |transfer| on the estimate's grid.
// Bins where |transfer| < floor_tolerance are collected into the error.
SpectralEstimate calibrate_spectrum(const SpectralEstimate& raw,
                                    const FrequencyResponse& transfer,
                                    double floor_tolerance = 1e-30);

// Forward application of a transfer to an ASD (the inverse of calibration).
SpectralEstimate apply_transfer(const SpectralEstimate& est,
                                const FrequencyResponse& transfer);

struct DetuningSweepPoint {
  double delta_over_kappa = 0.0;
  double k_opt = 0.0;
  double omega_eff = 0.0;
  double f_eff_hz = 0.0;
};

struct DetuningSweep {
  std::vector<DetuningSweepPoint> points;
  std::size_t peak_index = 0;   // location of the maximum omega_eff
};

// Effective-resonance curve versus detuning at fixed input power. Each grid
// value is delta/kappa and must lie in (0, 3].
DetuningSweep detuning_sweep(const CavityParams& cavity, const LaserParams& laser,
                             const MechanicalParams& mech,
                             const std::vector<double>& delta_over_kappa_grid);

} // namespace optomech

#endif
