#include "optomech/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "optomech/constants.hpp"
#include "linalg.hpp"

namespace optomech {

FrequencyResponse FrequencyResponse::then(const FrequencyResponse& next) const {
  if (units_out != next.units_in) {
    throw unit_error("block composition mismatch: '" + units_out.str() +
                     "' feeds a block expecting '" + next.units_in.str() + "'");
  }
  FrequencyResponse out;
  out.units_in = units_in;
  out.units_out = next.units_out;
  auto first = eval;
  auto second = next.eval;
  out.eval = [first, second](double omega) { return first(omega) * second(omega); };
  return out;
}

FrequencyResponse FrequencyResponse::flat(cplx value, const std::string& in,
                                          const std::string& out_u) {
  FrequencyResponse out;
  out.units_in = Unit::parse(in);
  out.units_out = Unit::parse(out_u);
  out.eval = [value](double) { return value; };
  return out;
}

FrequencyResponse FrequencyResponse::zpk(std::vector<cplx> zeros, std::vector<cplx> poles,
                                         double gain, const std::string& in,
                                         const std::string& out_u) {
  FrequencyResponse out;
  out.units_in = Unit::parse(in);
  out.units_out = Unit::parse(out_u);
  out.eval = [zeros = std::move(zeros), poles = std::move(poles), gain](double omega) {
    const cplx s(0.0, omega);
    cplx value(gain, 0.0);
    for (const cplx& z : zeros) value *= (s - z);
    for (const cplx& p : poles) value /= (s - p);
    return value;
  };
  return out;
}

FrequencyResponse FrequencyResponse::integrator(double omega_ug, const std::string& in,
                                                const std::string& out_u) {
  FrequencyResponse out;
  out.units_in = Unit::parse(in);
  out.units_out = Unit::parse(out_u);
  out.eval = [omega_ug](double omega) { return cplx(0.0, -omega_ug / omega); };
  return out;
}

cplx suspension_susceptibility(double mass, double omega_m, double quality_factor,
                               DampingModel damping, double omega) {
  if (!(omega > 0.0)) {
    throw std::domain_error("suspension_susceptibility: omega must be > 0");
  }
  const double wm2 = omega_m * omega_m;
  cplx denom;
  if (damping == DampingModel::viscous) {
    denom = cplx(wm2 - omega * omega, omega * omega_m / quality_factor);
  } else {
    denom = cplx(wm2 - omega * omega, wm2 / quality_factor);
  }
  return 1.0 / (mass * denom);
}

cplx mech_susceptibility(const MechanicalParams& mech, double omega) {
  const double omega_m = pendulum_mode(mech).omega_m;
  return suspension_susceptibility(mech.mirror_mass, omega_m, mech.quality_factor,
                                   mech.damping_model, omega);
}

FrequencyResponse susceptibility_response(double mass, double omega_m,
                                          double quality_factor, DampingModel damping) {
  FrequencyResponse out;
  out.units_in = Unit::parse("N");
  out.units_out = Unit::parse("m");
  out.eval = [mass, omega_m, quality_factor, damping](double omega) {
    return suspension_susceptibility(mass, omega_m, quality_factor, damping, omega);
  };
  return out;
}

OpticalSpring optical_spring(const CavityParams& cavity, const MechanicalParams& mech,
                             double n_circ) {
  if (n_circ < 0.0) throw std::domain_error("optical_spring: n_circ must be >= 0");
  const double lorentzian =
      cavity.kappa * cavity.kappa + cavity.detuning * cavity.detuning;
  OpticalSpring out;
  out.k_opt = 2.0 * k_hbar * cavity.coupling_g * cavity.coupling_g * n_circ *
              cavity.detuning / lorentzian;
  const double omega_m = pendulum_mode(mech).omega_m;
  const double w2 = omega_m * omega_m + out.k_opt / mech.mirror_mass;
  if (w2 <= 0.0) {
    out.stable = false;
    out.omega_eff = 0.0;
  } else {
    out.stable = true;
    out.omega_eff = std::sqrt(w2);
  }
  return out;
}

namespace {

void require_dimensionless(const cplx&, const Unit& in, const Unit& out,
                           const char* name) {
  if (in != out) {
    throw unit_error(std::string(name) + " must be dimensionless, got '" + in.str() +
                     "' -> '" + out.str() + "'");
  }
}

} // namespace

LoopGains loop_gains(const LoopModel& loop, double omega) {
  const FrequencyResponse g1_chain = loop.h_pend.then(loop.h_opt);
  const FrequencyResponse g2_chain =
      loop.h_pdh.then(loop.h_pd).then(loop.h_servo).then(loop.h_act).then(loop.h_c);
  LoopGains out;
  out.g1 = g1_chain(omega);
  out.g2 = g2_chain(omega);
  require_dimensionless(out.g1, g1_chain.units_in, g1_chain.units_out, "G1");
  require_dimensionless(out.g2, g2_chain.units_in, g2_chain.units_out, "G2");
  return out;
}

Monitor1Transfer monitor1_transfer(const LoopModel& loop, double omega) {
  const LoopGains g = loop_gains(loop, omega);
  const cplx denom = 1.0 - g.g1 - g.g2;
  if (std::abs(denom) < k_singular_loop_tolerance) {
    std::ostringstream msg;
    msg << "monitor1_transfer: loop marginally stable at omega=" << omega
        << " rad/s, |1-G1-G2|=" << std::abs(denom);
    throw singular_loop_error(msg.str());
  }
  Monitor1Transfer out;
  out.from_force =
      g.g2 * loop.h_pend(omega) / (loop.h_c(omega) * loop.h_act(omega) * denom);
  out.from_sensing = out.from_force / loop.h_c(omega);
  return out;
}

cplx monitor3_transfer(const LoopModel& loop, double omega) {
  const LoopGains g = loop_gains(loop, omega);
  if (std::abs(g.g2) >= k_g2_negligible_limit) {
    std::ostringstream msg;
    msg << "monitor3_transfer: |G2|=" << std::abs(g.g2) << " at omega=" << omega
        << " rad/s violates the negligible-feedback assumption (limit "
        << k_g2_negligible_limit << ")";
    throw assumption_error(msg.str());
  }
  return loop.h_pdh(omega) * loop.h_pd(omega);
}

cplx closed_pendulum_response(const LoopModel& loop, double omega) {
  const FrequencyResponse g1_chain = loop.h_pend.then(loop.h_opt);
  const cplx g1 = g1_chain(omega);
  return loop.h_pend(omega) / (1.0 - g1);
}

LoopGraphSolution solve_loop_graph(const LoopModel& loop, double omega,
                                   Injection injection) {
  // Unknowns: 0 x_pend, 1 x_c, 2 x_cav, 3 v_pdh, 4 v_pd, 5 v_servo, 6 f_act.
  const cplx hp = loop.h_pend(omega);
  const cplx hc = loop.h_c(omega);
  const cplx ho = loop.h_opt(omega);
  const cplx hq = loop.h_pdh(omega);
  const cplx hd = loop.h_pd(omega);
  const cplx hs = loop.h_servo(omega);
  const cplx ha = loop.h_act(omega);

  cplx delta_f = 0.0;
  cplx n_s = 0.0;
  switch (injection) {
    case Injection::force_on_pendulum: delta_f = 1.0; break;
    case Injection::sensing_displacement: n_s = 1.0; break;
    case Injection::sensing_equivalent_force: delta_f = 1.0 / hc; break;
  }

  const std::size_t n = 7;
  std::vector<cplx> a(n * n, cplx(0.0));
  std::vector<cplx> b(n, cplx(0.0));
  auto at = [&](std::size_t r, std::size_t c) -> cplx& { return a[r * n + c]; };

  // x_pend = h_pend*(delta_f + h_opt*x_cav)
  at(0, 0) = 1.0;
  at(0, 2) = -hp * ho;
  b[0] = hp * delta_f;
  // x_cav = x_pend + x_c
  at(1, 2) = 1.0;
  at(1, 0) = -1.0;
  at(1, 1) = -1.0;
  // v_pdh = h_pdh*(x_cav + n_s)
  at(2, 3) = 1.0;
  at(2, 2) = -hq;
  b[2] = hq * n_s;
  // v_pd = h_pd*v_pdh
  at(3, 4) = 1.0;
  at(3, 3) = -hd;
  // v_servo = h_servo*v_pd
  at(4, 5) = 1.0;
  at(4, 4) = -hs;
  // f_act = h_act*v_servo
  at(5, 6) = 1.0;
  at(5, 5) = -ha;
  // x_c = h_c*f_act
  at(6, 1) = 1.0;
  at(6, 6) = -hc;

  const std::vector<cplx> x = solve_dense(std::move(a), std::move(b));

  LoopGraphSolution out;
  out.x_pend = x[0];
  out.x_c = x[1];
  out.x_cav = x[2];
  out.monitor3 = x[4];
  out.monitor1 = x[5];
  out.sensed_length = x[2] + n_s;
  return out;
}

SpectralEstimate calibrate_spectrum(const SpectralEstimate& raw,
                                    const FrequencyResponse& transfer,
                                    double floor_tolerance) {
  SpectralEstimate out = raw;
  std::vector<std::size_t> bad;
  for (std::size_t k = 0; k < raw.grid_hz.size(); ++k) {
    const double mag = std::abs(transfer(k_two_pi * raw.grid_hz[k]));
    if (mag < floor_tolerance) {
      bad.push_back(k);
      continue;
    }
    out.asd[k] = raw.asd[k] / mag;
    out.psd[k] = out.asd[k] * out.asd[k];
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "calibrate_spectrum: |transfer| below " << floor_tolerance << " at " << bad.size()
        << " bin(s):";
    for (std::size_t i = 0; i < std::min<std::size_t>(bad.size(), 8); ++i) {
      msg << " " << raw.grid_hz[bad[i]] << " Hz";
    }
    if (bad.size() > 8) msg << " ...";
    throw calibration_error(msg.str());
  }
  out.unit = (Unit::parse(raw.unit) / transfer.unit_ratio()).str();
  return out;
}

SpectralEstimate apply_transfer(const SpectralEstimate& est,
                                const FrequencyResponse& transfer) {
  SpectralEstimate out = est;
  for (std::size_t k = 0; k < est.grid_hz.size(); ++k) {
    const double mag = std::abs(transfer(k_two_pi * est.grid_hz[k]));
    out.asd[k] = est.asd[k] * mag;
    out.psd[k] = out.asd[k] * out.asd[k];
  }
  out.unit = (Unit::parse(est.unit) * transfer.unit_ratio()).str();
  return out;
}

DetuningSweep detuning_sweep(const CavityParams& cavity, const LaserParams& laser,
                             const MechanicalParams& mech,
                             const std::vector<double>& delta_over_kappa_grid) {
  DetuningSweep out;
  out.points.reserve(delta_over_kappa_grid.size());
  for (double x : delta_over_kappa_grid) {
    if (!(x > 0.0) || x > 3.0) {
      throw std::domain_error("detuning_sweep: grid values must lie in (0, 3]");
    }
    CavityParams detuned = cavity;
    detuned.detuning = x * cavity.kappa;
    const IntracavityState state = intracavity_state(detuned, laser);
    const OpticalSpring spring = optical_spring(detuned, mech, state.n_circ);
    DetuningSweepPoint pt;
    pt.delta_over_kappa = x;
    pt.k_opt = spring.k_opt;
    pt.omega_eff = spring.omega_eff;
    pt.f_eff_hz = spring.omega_eff / k_two_pi;
    out.points.push_back(pt);
  }
  for (std::size_t i = 1; i < out.points.size(); ++i) {
    if (out.points[i].omega_eff > out.points[out.peak_index].omega_eff) out.peak_index = i;
  }
  return out;
}

} // namespace optomech
