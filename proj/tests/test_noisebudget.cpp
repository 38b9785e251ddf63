#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "optomech/config.hpp"
#include "optomech/constants.hpp"
#include "optomech/model.hpp"
#include "optomech/noisebudget.hpp"

using namespace optomech;

namespace {

// Frozen reference levels, double-sided force PSDs in N^2/Hz, evaluated by
// hand from the closed forms at the default parameters.
constexpr double k_sq_4p1w = 2.1299739257515116e-32;    // at 4.1 W circulating
constexpr double k_n_circ_4p1w = 7325344431.347949;
constexpr double k_sq_76mw = 1.5951258736397202e-32;    // resonant, 7.6 mW in
constexpr double k_sc_76mw = 1.7896414437490953e-29;
constexpr double k_sth_viscous = 1.8121018125e-30;
constexpr double k_sth_structure_325 = 1.242359831332988e-32;
constexpr double k_sens_325 = 3.7555555555555554e-33;   // 2e-17 anchor at 75 Hz
constexpr double k_phase_unit_sffc = 9.026115301351584e-06;
constexpr double k_weff_1p1 = 2610.2656768119905;
constexpr double k_ratio_4p1w = 1.7144581400914731;
constexpr double k_ratio_occupation_shift = 2.599587212159804e-11;
constexpr double k_b_ref = 93.99716060823984;
constexpr double k_two_b_sq_76mw = 1121.943711981509;
constexpr double k_crossover_thermal_w = 0.005919241154672221;
constexpr double k_crossover_classical_w = 6.773958371385082e-06;
constexpr double k_phase_fraction = 0.0030000051234305657;

ExperimentConfig ratio_operating_point() {
  ExperimentConfig cfg = default_config();
  cfg.cavity.detuning = 0.0;
  cfg.laser.input_power = input_power_for_circulating(cfg.cavity, 4.1);
  return cfg;
}

} // namespace

TEST_CASE("quantum back-action level") {
  const CavityParams cav = default_config().cavity;
  CHECK(qba_psd(k_n_circ_4p1w, cav) == doctest::Approx(k_sq_4p1w).epsilon(1e-12));

  SUBCASE("linear in the circulating photon number") {
    CHECK(qba_psd(2.0 * k_n_circ_4p1w, cav) ==
          doctest::Approx(2.0 * k_sq_4p1w).epsilon(1e-15));
    CHECK(qba_psd(0.0, cav) == 0.0);
  }

  CHECK_THROWS_AS(qba_psd(-1.0, cav), std::domain_error);
}

TEST_CASE("classical back-action scales on the quantum level") {
  const CavityParams cav = default_config().cavity;  // critically coupled

  SUBCASE("unit shot ratio doubles the quantum level at kappa_in = kappa/2") {
    CHECK(classical_ba_psd(k_n_circ_4p1w, cav, 1.0) ==
          doctest::Approx(2.0 * qba_psd(k_n_circ_4p1w, cav)).epsilon(1e-15));
  }

  SUBCASE("quadratic in the shot ratio") {
    const double s1 = classical_ba_psd(k_n_circ_4p1w, cav, 1.0);
    CHECK(classical_ba_psd(k_n_circ_4p1w, cav, 3.0) ==
          doctest::Approx(9.0 * s1).epsilon(1e-15));
  }

  CHECK_THROWS_AS(classical_ba_psd(k_n_circ_4p1w, cav, -0.1), std::domain_error);
}

TEST_CASE("suspension thermal force noise") {
  MechanicalParams mech = default_config().mech;

  SUBCASE("viscous damping gives a flat spectrum") {
    mech.damping_model = DampingModel::viscous;
    CHECK(thermal_psd(mech, k_two_pi * 325.0) ==
          doctest::Approx(k_sth_viscous).epsilon(1e-12));
    CHECK(thermal_psd(mech, k_two_pi * 50.0) ==
          doctest::Approx(thermal_psd(mech, k_two_pi * 325.0)).epsilon(1e-15));
  }

  SUBCASE("structure damping falls as 1/f") {
    mech.damping_model = DampingModel::structure;
    CHECK(thermal_psd(mech, k_two_pi * 325.0) ==
          doctest::Approx(k_sth_structure_325).epsilon(1e-12));
    CHECK(thermal_psd(mech, k_two_pi * 75.0) ==
          doctest::Approx(4.0 * thermal_psd(mech, k_two_pi * 300.0)).epsilon(1e-15));
  }

  SUBCASE("linear in temperature") {
    MechanicalParams cold = mech;
    cold.temperature = 150.0;
    CHECK(thermal_psd(mech, k_two_pi * 325.0) ==
          doctest::Approx(2.0 * thermal_psd(cold, k_two_pi * 325.0)).epsilon(1e-15));
  }

  CHECK_THROWS_AS(thermal_psd(mech, 0.0), std::domain_error);
}

TEST_CASE("phase-noise back-action through the detuned cavity") {
  CavityParams cav = default_config().cavity;
  cav.detuning = 1.1 * cav.kappa;
  const double dphi = default_config().delta_phi;

  CHECK(phase_ba_psd(cav, k_weff_1p1, dphi, 1.0) ==
        doctest::Approx(k_phase_unit_sffc).epsilon(1e-12));

  SUBCASE("proportional to the force-fluctuation scale") {
    CHECK(phase_ba_psd(cav, k_weff_1p1, dphi, 5.0) ==
          doctest::Approx(5.0 * k_phase_unit_sffc).epsilon(1e-15));
  }

  SUBCASE("vanishes on resonance, odd in detuning") {
    CavityParams resonant = cav;
    resonant.detuning = 0.0;
    CHECK(phase_ba_psd(resonant, k_weff_1p1, dphi, 1.0) == 0.0);
    CavityParams flipped = cav;
    flipped.detuning = -cav.detuning;
    CHECK(phase_ba_psd(flipped, k_weff_1p1, dphi, 1.0) ==
          doctest::Approx(-k_phase_unit_sffc).epsilon(1e-15));
  }

  CHECK_THROWS_AS(phase_ba_psd(cav, k_weff_1p1, -1.0, 1.0), std::domain_error);
}

TEST_CASE("sensing noise rises as f^2 in force") {
  const SensingConfig sens = default_config().sensing;

  CHECK(sensing_psd(sens.anchor_asd, sens.anchor_hz, k_two_pi * 325.0) ==
        doctest::Approx(k_sens_325).epsilon(1e-12));

  SUBCASE("anchor point carries half the squared single-sided level") {
    CHECK(sensing_psd(sens.anchor_asd, sens.anchor_hz, k_two_pi * sens.anchor_hz) ==
          doctest::Approx(0.5 * sens.anchor_asd * sens.anchor_asd).epsilon(1e-15));
  }

  SUBCASE("quadratic frequency law") {
    const double s75 = sensing_psd(sens.anchor_asd, sens.anchor_hz, k_two_pi * 75.0);
    CHECK(sensing_psd(sens.anchor_asd, sens.anchor_hz, k_two_pi * 150.0) ==
          doctest::Approx(4.0 * s75).epsilon(1e-15));
  }

  CHECK_THROWS_AS(sensing_psd(-1.0, 75.0, k_two_pi * 325.0), std::domain_error);
  CHECK_THROWS_AS(sensing_psd(2e-17, 0.0, k_two_pi * 325.0), std::domain_error);
}

TEST_CASE("budget assembly on a frequency grid") {
  const ExperimentConfig cfg = default_config();
  const std::vector<double> grid = {10.0, 50.0, 100.0, 325.0, 1000.0};
  const NoiseBudget budget = build_budget(cfg, grid);

  SUBCASE("all five sources present, total is the exact per-bin sum") {
    REQUIRE(budget.per_source.size() == 5);
    for (const char* name : {"qba", "classical", "thermal", "sensing", "phase"}) {
      REQUIRE(budget.per_source.count(name) == 1);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double sum = 0.0;
      for (const auto& [name, col] : budget.per_source) sum += col[i];
      CHECK(budget.total[i] == sum);
      CHECK(budget.total[i] >= 0.0);
    }
  }

  SUBCASE("quantum term is frequency flat, classical follows the RIN table") {
    const auto& qba = budget.per_source.at("qba");
    for (double v : qba) CHECK(v == budget.s_qba);
    const auto& classical = budget.per_source.at("classical");
    const IntracavityState st = intracavity_state(cfg.cavity, cfg.laser);
    const double b325 = shot_noise_ratio(cfg.laser_at(325.0), cfg.laser.input_power);
    CHECK(classical[3] ==
          doctest::Approx(classical_ba_psd(st.n_circ, cfg.cavity, b325)).epsilon(1e-15));
    CHECK(classical[3] == doctest::Approx(k_sc_76mw).epsilon(1e-12));
    CHECK(budget.s_qba == doctest::Approx(k_sq_76mw).epsilon(1e-12));
    // RIN is larger at low frequency, so the classical term must be too
    CHECK(classical[0] > classical[3]);
  }

  SUBCASE("ratio helper tracks the structure-damping slope") {
    CHECK(budget.ratio_at(650.0) ==
          doctest::Approx(2.0 * budget.ratio_at(325.0)).epsilon(1e-12));
  }

  SUBCASE("grid validation") {
    CHECK_THROWS_AS(build_budget(cfg, {}), std::domain_error);
    CHECK_THROWS_AS(build_budget(cfg, {10.0, 10.0}), std::domain_error);
    CHECK_THROWS_AS(build_budget(cfg, {-5.0, 10.0}), std::domain_error);
  }

  SUBCASE("source failures carry the source name") {
    ExperimentConfig bad = cfg;
    bad.sensing.anchor_asd = -1.0;
    CHECK_THROWS_WITH_AS(build_budget(bad, grid),
                         doctest::Contains("noise source 'sensing'"),
                         std::domain_error);
  }
}

TEST_CASE("back-action to thermal ratio at the published operating point") {
  const ExperimentConfig cfg = ratio_operating_point();
  const NoiseBudget budget = build_budget(cfg, {325.0});

  CHECK(budget.metadata["ratio_qba_thermal"].get<double>() ==
        doctest::Approx(k_ratio_4p1w).epsilon(1e-12));
  CHECK(budget.metadata["n_circ"].get<double>() ==
        doctest::Approx(k_n_circ_4p1w).epsilon(1e-12));
  CHECK(budget.metadata["p_circ_w"].get<double>() == doctest::Approx(4.1).epsilon(1e-12));

  SUBCASE("published closed form agrees with the direct PSD division") {
    const double direct = budget.metadata["ratio_qba_thermal"].get<double>();
    const double published = budget.metadata["ratio_published_form"].get<double>();
    CHECK(std::abs(published / direct - 1.0) < 1e-10);
  }

  SUBCASE("the exact occupation shifts the closed form by half a quantum") {
    const IntracavityState st = intracavity_state(cfg.cavity, cfg.laser);
    const double exact =
        ratio_published_form(cfg.cavity, cfg.mech, st.n_circ, 325.0, true);
    const double high_t =
        ratio_published_form(cfg.cavity, cfg.mech, st.n_circ, 325.0, false);
    CHECK(exact / high_t - 1.0 ==
          doctest::Approx(k_ratio_occupation_shift).epsilon(1e-3));
    // the high-T form reproduces the direct division to rounding
    const double direct = budget.s_qba / thermal_psd(cfg.mech, k_two_pi * 325.0);
    CHECK(high_t == doctest::Approx(direct).epsilon(1e-13));
  }

  SUBCASE("viscous damping variant of the closed form") {
    ExperimentConfig visc = cfg;
    visc.mech.damping_model = DampingModel::viscous;
    const IntracavityState st = intracavity_state(visc.cavity, visc.laser);
    const double published =
        ratio_published_form(visc.cavity, visc.mech, st.n_circ, 325.0, false);
    const double direct =
        qba_psd(st.n_circ, visc.cavity) / thermal_psd(visc.mech, k_two_pi * 325.0);
    CHECK(published == doctest::Approx(direct).epsilon(1e-13));
  }

  SUBCASE("ratio is inversely proportional to temperature") {
    ExperimentConfig cold = cfg;
    cold.mech.temperature = 150.0;
    const NoiseBudget half = build_budget(cold, {325.0});
    CHECK(half.metadata["ratio_qba_thermal"].get<double>() ==
          doctest::Approx(2.0 * k_ratio_4p1w).epsilon(1e-12));
  }
}

TEST_CASE("budget metadata snapshot") {
  ExperimentConfig cfg = default_config();
  cfg.cavity.detuning = 1.1 * cfg.cavity.kappa;
  const NoiseBudget budget = build_budget(cfg, {325.0});
  const nlohmann::json& meta = budget.metadata;

  CHECK(meta["damping_model"].get<std::string>() == "structure");
  CHECK(meta["omega_m_rad_s"].get<double>() == doctest::Approx(14.0).epsilon(1e-15));
  CHECK(meta["omega_eff_rad_s"].get<double>() ==
        doctest::Approx(k_weff_1p1).epsilon(1e-12));
  CHECK(meta["displacement_enhancement"].get<double>() ==
        doctest::Approx(k_weff_1p1 / 14.0).epsilon(1e-12));
  CHECK(meta["shot_ratio_b_at_reference"].get<double>() ==
        doctest::Approx(k_b_ref).epsilon(1e-12));
  CHECK(meta["shot_reference_power_w"].get<double>() ==
        doctest::Approx(3.166e-2).epsilon(1e-15));
  CHECK(meta["phase_fraction_asd"].get<double>() ==
        doctest::Approx(k_phase_fraction).epsilon(1e-12));

  SUBCASE("resonant configuration has no phase leakage or spring") {
    const NoiseBudget flat = build_budget(default_config(), {325.0});
    CHECK(flat.metadata["displacement_enhancement"].get<double>() == 1.0);
    CHECK(flat.metadata["phase_fraction_asd"].get<double>() == 0.0);
  }
}

TEST_CASE("power dependence of the total force noise") {
  const ExperimentConfig cfg = default_config();  // resonant
  const std::vector<double> powers = {0.0, 0.37e-3, 1.5e-3, 4.8e-3, 7.6e-3};
  const PowerDependence dep = power_dependence(cfg, powers, 325.0);
  REQUIRE(dep.points.size() == powers.size());

  SUBCASE("zero power leaves only thermal and sensing noise") {
    const PowerPoint& pt = dep.points[0];
    CHECK(pt.asd_qba == 0.0);
    CHECK(pt.asd_classical == 0.0);
    CHECK(pt.asd_total ==
          doctest::Approx(std::sqrt(dep.c0)).epsilon(1e-15));
  }

  SUBCASE("components recombine into the total") {
    for (const PowerPoint& pt : dep.points) {
      const double sum = pt.asd_qba * pt.asd_qba + pt.asd_classical * pt.asd_classical +
                         pt.asd_thermal * pt.asd_thermal +
                         pt.asd_sensing * pt.asd_sensing + pt.asd_phase * pt.asd_phase;
      CHECK(pt.asd_total * pt.asd_total == doctest::Approx(sum).epsilon(1e-12));
      CHECK(pt.asd_phase == 0.0);  // on resonance
    }
  }

  SUBCASE("polynomial coefficients match the per-point evaluation") {
    const PowerPoint& pt = dep.points.back();  // 7.6 mW
    CHECK(dep.c1 * pt.p_in ==
          doctest::Approx(pt.asd_qba * pt.asd_qba).epsilon(1e-12));
    CHECK(dep.c2 * pt.p_in * pt.p_in ==
          doctest::Approx(pt.asd_classical * pt.asd_classical).epsilon(1e-12));
    CHECK(dep.c0 == doctest::Approx(2.0 * (thermal_psd(cfg.mech, k_two_pi * 325.0) +
                                           sensing_psd(cfg.sensing.anchor_asd,
                                                       cfg.sensing.anchor_hz,
                                                       k_two_pi * 325.0)))
                        .epsilon(1e-15));
  }

  SUBCASE("classical noise swamps the quantum term at full power") {
    const PowerPoint& pt = dep.points.back();
    const double ratio = (pt.asd_classical / pt.asd_qba) * (pt.asd_classical / pt.asd_qba);
    CHECK(ratio == doctest::Approx(k_two_b_sq_76mw).epsilon(1e-12));
  }

  SUBCASE("crossover powers") {
    CHECK(dep.crossover_qba_thermal_w ==
          doctest::Approx(k_crossover_thermal_w).epsilon(1e-12));
    CHECK(dep.crossover_qba_classical_w ==
          doctest::Approx(k_crossover_classical_w).epsilon(1e-12));
    CHECK(dep.crossover_qba_classical_w ==
          doctest::Approx(dep.c1 / dep.c2).epsilon(1e-15));
  }

  CHECK_THROWS_AS(power_dependence(cfg, {-1e-3}, 325.0), std::domain_error);
}
