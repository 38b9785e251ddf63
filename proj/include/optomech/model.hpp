#ifndef OPTOMECH_MODEL_HPP
#define OPTOMECH_MODEL_HPP

#include <string>

namespace optomech {

enum class CavityGeometry { triangular, linear };
enum class DampingModel { viscous, structure };

std::string to_string(CavityGeometry g);
std::string to_string(DampingModel d);
CavityGeometry cavity_geometry_from_string(const std::string& s);
DampingModel damping_model_from_string(const std::string& s);

// Optical cavity parameters. kappa is the amplitude half linewidth (field
// decay rate) in rad/s; detuning is the laser-cavity offset in the same
// convention. coupling_g is the cavity frequency pull per metre of mirror
// displacement, rad/(s*m).
struct CavityParams {
  double kappa = 0.0;
  double kappa_in = 0.0;
  double detuning = 0.0;
  double wavelength = 0.0;
  double round_trip_length = 0.0;
  double coupling_g = 0.0;
  double incident_angle_beta = 0.0;
  double k_t_opt = 0.0;            // optical torsional stiffness, N*m/rad
  CavityGeometry geometry = CavityGeometry::triangular;

  void validate() const;           // throws std::domain_error on bad fields
};

// Suspended-mirror mechanical parameters. The wire hangs a single mirror;
// damping_model selects the dissipation law used everywhere downstream.
struct MechanicalParams {
  double mirror_mass = 0.0;        // kg
  double wire_length = 0.0;        // m
  double wire_radius = 0.0;        // m
  double wire_youngs_modulus = 0.0; // Pa
  double wire_shear_modulus = 0.0;  // Pa
  double wire_density = 0.0;        // kg/m^3
  double quality_factor = 0.0;
  double temperature = 0.0;        // K
  DampingModel damping_model = DampingModel::structure;

  void validate() const;
};

// Input laser parameters. rin_amplitude is the relative intensity noise in
// amplitude (1/sqrt(Hz)); phase_noise is the laser phase noise floor in
// rad/sqrt(Hz). quantum_efficiency is the photodetector responsivity in A/W.
struct LaserParams {
  double input_power = 0.0;
  double rin_amplitude = 0.0;
  double quantum_efficiency = 0.0;
  double phase_noise = 0.0;

  void validate() const;
};

// Derived static quantities collected in one record for reports.
struct DerivedState {
  double omega_m = 0.0;        // rad/s
  double n_circ = 0.0;
  double p_circ = 0.0;         // W
  double shot_ratio_b = 0.0;
  double n_th = 0.0;
  double dilution = 0.0;
  double k_t_wire = 0.0;       // N*m/rad
};

struct PendulumMode {
  double omega_m = 0.0;        // rad/s
  double k_grav = 0.0;         // N/m
};

struct WireMechanics {
  double k_el = 0.0;           // N/m, bending-equivalent stiffness
  double lambda_flex = 0.0;    // m
  double dilution = 0.0;       // k_grav / k_el = 2l / lambda_flex
  double k_t_wire = 0.0;       // N*m/rad
  double violin_f1 = 0.0;      // Hz
};

struct TorsionalStability {
  bool stable = false;
  double power_margin = 0.0;   // |k_t_opt| / k_t_wire
};

struct IntracavityState {
  double n_circ = 0.0;
  double p_circ = 0.0;         // W
};

// Gravity pendulum mode: omega_m = sqrt(g_earth/l), k_grav = m*g_earth/l.
PendulumMode pendulum_mode(const MechanicalParams& mech);

// Wire elasticity figures:
//   lambda_flex = sqrt(E*I/T), I = pi*r^4/4, T = m*g_earth
//   dilution    = 2l/lambda_flex   (flexure correction at both ends)
//   k_el        = k_grav/dilution
//   k_t_wire    = pi*G*r^4/(2l)
//   violin_f1   = (1/2l)*sqrt(T/mu), mu = rho*pi*r^2
WireMechanics wire_mechanics(const MechanicalParams& mech);

// Yaw stability of the suspended mirror. The triangular geometry gives a
// positive optical torsional stiffness, so it is stable at any power; the
// linear geometry flips the sign and is stable only while the wire wins.
// power_margin = |k_t_opt|/k_t_wire, the factor by which stored power
// exceeds the linear-cavity instability limit (k_t_opt scales with power).
TorsionalStability torsional_stability(const CavityParams& cavity, double k_t_wire);

// Steady-state cavity buildup at the configured detuning:
//   N_circ = 2*kappa_in*(P_in/(hbar*omega_L)) / (kappa^2 + detuning^2)
//   p_circ = N_circ*hbar*omega_L*c/L_rt
IntracavityState intracavity_state(const CavityParams& cavity, const LaserParams& laser);

// Input power that yields the requested circulating power at the configured
// detuning (inverse of intracavity_state).
double input_power_for_circulating(const CavityParams& cavity, double p_circ_w);

// Relative shot noise level in amplitude: B = sqrt(rho*P/(2e)) * A evaluated
// at reference_power. shot_noise_reference_power inverts the formula.
double shot_noise_ratio(const LaserParams& laser, double reference_power);
double shot_noise_reference_power(const LaserParams& laser, double b);

// Bose occupation n_th = 1/(exp(hbar*omega/(k_B*T)) - 1); returns 0 at T=0.
// high_t_limit selects the k_B*T/(hbar*omega) approximation instead.
double thermal_occupation(double temperature, double omega, bool high_t_limit = false);

// Convenience bundle of the derived quantities for reports. The shot ratio
// is evaluated at the laser input power.
DerivedState derive_state(const CavityParams& cavity, const MechanicalParams& mech,
                          const LaserParams& laser, double ratio_frequency_hz);

} // namespace optomech

#endif
