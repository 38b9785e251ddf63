#include "optomech/model.hpp"

#include <cmath>
#include <stdexcept>

#include "optomech/constants.hpp"

namespace optomech {

std::string to_string(CavityGeometry g) {
  return g == CavityGeometry::triangular ? "triangular" : "linear";
}

std::string to_string(DampingModel d) {
  return d == DampingModel::viscous ? "viscous" : "structure";
}

CavityGeometry cavity_geometry_from_string(const std::string& s) {
  if (s == "triangular") return CavityGeometry::triangular;
  if (s == "linear") return CavityGeometry::linear;
  throw std::invalid_argument("unknown cavity geometry: '" + s + "'");
}

DampingModel damping_model_from_string(const std::string& s) {
  if (s == "viscous") return DampingModel::viscous;
  if (s == "structure") return DampingModel::structure;
  throw std::invalid_argument("unknown damping model: '" + s + "'");
}

void CavityParams::validate() const {
  if (!(kappa > 0.0)) throw std::domain_error("cavity.kappa must be > 0");
  if (!(kappa_in > 0.0) || kappa_in > kappa) {
    throw std::domain_error("cavity.kappa_in must satisfy 0 < kappa_in <= kappa");
  }
  if (!(wavelength > 0.0)) throw std::domain_error("cavity.wavelength must be > 0");
  if (!(round_trip_length > 0.0)) {
    throw std::domain_error("cavity.round_trip_length must be > 0");
  }
}

void MechanicalParams::validate() const {
  if (!(mirror_mass > 0.0)) throw std::domain_error("mechanics.mirror_mass must be > 0");
  if (!(wire_length > 0.0)) throw std::domain_error("mechanics.wire_length must be > 0");
  if (!(wire_radius > 0.0)) throw std::domain_error("mechanics.wire_radius must be > 0");
  if (!(wire_youngs_modulus > 0.0)) {
    throw std::domain_error("mechanics.wire_youngs_modulus must be > 0");
  }
  if (!(wire_shear_modulus > 0.0)) {
    throw std::domain_error("mechanics.wire_shear_modulus must be > 0");
  }
  if (!(wire_density > 0.0)) throw std::domain_error("mechanics.wire_density must be > 0");
  if (!(quality_factor > 1.0)) {
    throw std::domain_error("mechanics.quality_factor must be > 1");
  }
  if (temperature < 0.0) throw std::domain_error("mechanics.temperature must be >= 0");
}

void LaserParams::validate() const {
  if (input_power < 0.0) throw std::domain_error("laser.input_power must be >= 0");
  if (rin_amplitude < 0.0) throw std::domain_error("laser.rin_amplitude must be >= 0");
  if (!(quantum_efficiency > 0.0) || quantum_efficiency > 1.2) {
    throw std::domain_error("laser.quantum_efficiency must be in (0, 1.2]");
  }
  if (phase_noise < 0.0) throw std::domain_error("laser.phase_noise must be >= 0");
}

PendulumMode pendulum_mode(const MechanicalParams& mech) {
  if (!(mech.wire_length > 0.0)) {
    throw std::domain_error("pendulum_mode: wire_length must be > 0");
  }
  if (!(mech.mirror_mass > 0.0)) {
    throw std::domain_error("pendulum_mode: mirror_mass must be > 0");
  }
  PendulumMode out;
  out.omega_m = std::sqrt(k_g_earth / mech.wire_length);
  out.k_grav = mech.mirror_mass * k_g_earth / mech.wire_length;
  return out;
}

WireMechanics wire_mechanics(const MechanicalParams& mech) {
  mech.validate();
  const double r = mech.wire_radius;
  const double l = mech.wire_length;
  const double tension = mech.mirror_mass * k_g_earth;
  const double area_moment = k_pi * r * r * r * r / 4.0;

  WireMechanics out;
  out.lambda_flex = std::sqrt(mech.wire_youngs_modulus * area_moment / tension);
  out.dilution = 2.0 * l / out.lambda_flex;
  const double k_grav = tension / l;
  out.k_el = k_grav / out.dilution;
  out.k_t_wire = k_pi * mech.wire_shear_modulus * r * r * r * r / (2.0 * l);
  const double mu = mech.wire_density * k_pi * r * r;
  out.violin_f1 = std::sqrt(tension / mu) / (2.0 * l);
  return out;
}

TorsionalStability torsional_stability(const CavityParams& cavity, double k_t_wire) {
  if (!(k_t_wire > 0.0)) {
    throw std::domain_error("torsional_stability: k_t_wire must be > 0");
  }
  TorsionalStability out;
  out.power_margin = std::abs(cavity.k_t_opt) / k_t_wire;
  if (cavity.geometry == CavityGeometry::triangular) {
    out.stable = true;
  } else {
    // Linear geometry: the optical torsional stiffness enters with flipped
    // sign, so the wire has to outweigh it.
    out.stable = k_t_wire > std::abs(cavity.k_t_opt);
  }
  return out;
}

namespace {

double photon_energy(const CavityParams& cavity) {
  const double omega_l = k_two_pi * k_speed_of_light / cavity.wavelength;
  return k_hbar * omega_l;
}

} // namespace

IntracavityState intracavity_state(const CavityParams& cavity, const LaserParams& laser) {
  cavity.validate();
  if (laser.input_power < 0.0) {
    throw std::domain_error("intracavity_state: input_power must be >= 0");
  }
  const double e_photon = photon_energy(cavity);
  const double photon_rate = laser.input_power / e_photon;
  const double lorentzian = cavity.kappa * cavity.kappa + cavity.detuning * cavity.detuning;

  IntracavityState out;
  out.n_circ = 2.0 * cavity.kappa_in * photon_rate / lorentzian;
  out.p_circ = out.n_circ * e_photon * k_speed_of_light / cavity.round_trip_length;
  return out;
}

double input_power_for_circulating(const CavityParams& cavity, double p_circ_w) {
  cavity.validate();
  if (p_circ_w < 0.0) {
    throw std::domain_error("input_power_for_circulating: p_circ must be >= 0");
  }
  const double lorentzian = cavity.kappa * cavity.kappa + cavity.detuning * cavity.detuning;
  const double buildup =
      2.0 * cavity.kappa_in * k_speed_of_light / (cavity.round_trip_length * lorentzian);
  return p_circ_w / buildup;
}

double shot_noise_ratio(const LaserParams& laser, double reference_power) {
  if (!(reference_power > 0.0)) {
    throw std::domain_error("shot_noise_ratio: reference_power must be > 0");
  }
  const double photocurrent = laser.quantum_efficiency * reference_power;
  return std::sqrt(photocurrent / (2.0 * k_elementary_charge)) * laser.rin_amplitude;
}

double shot_noise_reference_power(const LaserParams& laser, double b) {
  if (!(laser.rin_amplitude > 0.0)) {
    throw std::domain_error("shot_noise_reference_power: rin_amplitude must be > 0");
  }
  if (b < 0.0) {
    throw std::domain_error("shot_noise_reference_power: b must be >= 0");
  }
  const double ratio = b / laser.rin_amplitude;
  return ratio * ratio * 2.0 * k_elementary_charge / laser.quantum_efficiency;
}

double thermal_occupation(double temperature, double omega, bool high_t_limit) {
  if (!(omega > 0.0)) throw std::domain_error("thermal_occupation: omega must be > 0");
  if (temperature < 0.0) {
    throw std::domain_error("thermal_occupation: temperature must be >= 0");
  }
  if (temperature == 0.0) return 0.0;
  const double x = k_hbar * omega / (k_boltzmann * temperature);
  if (high_t_limit) return 1.0 / x;
  return 1.0 / std::expm1(x);
}

DerivedState derive_state(const CavityParams& cavity, const MechanicalParams& mech,
                          const LaserParams& laser, double ratio_frequency_hz) {
  DerivedState out;
  const PendulumMode pend = pendulum_mode(mech);
  const WireMechanics wm = wire_mechanics(mech);
  const IntracavityState ics = intracavity_state(cavity, laser);
  out.omega_m = pend.omega_m;
  out.n_circ = ics.n_circ;
  out.p_circ = ics.p_circ;
  out.dilution = wm.dilution;
  out.k_t_wire = wm.k_t_wire;
  out.shot_ratio_b =
      laser.input_power > 0.0 ? shot_noise_ratio(laser, laser.input_power) : 0.0;
  out.n_th = thermal_occupation(mech.temperature, k_two_pi * ratio_frequency_hz);
  return out;
}

} // namespace optomech
