// Command line front end: simulate paths, run the particle filter with an
// optional grid oracle, verify the mollified-estimate lemmas and adjoint
// duality, and run the acceptance benchmark. All artifacts are deterministic
// functions of (config, seed).

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "jumpfilter/acceptance.hpp"
#include "jumpfilter/config.hpp"
#include "jumpfilter/errors.hpp"
#include "jumpfilter/filter.hpp"
#include "jumpfilter/grid_solver.hpp"
#include "jumpfilter/measure.hpp"
#include "jumpfilter/models.hpp"
#include "jumpfilter/operators.hpp"
#include "jumpfilter/quadrature.hpp"
#include "jumpfilter/report.hpp"
#include "jumpfilter/shift.hpp"
#include "jumpfilter/simulate.hpp"
#include "jumpfilter/verifier.hpp"

namespace jf = jumpfilter;
using json = nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  int threads = 1;
};

int default_threads() {
  if (const char* env = std::getenv("JUMPFILTER_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

jf::ExperimentConfig load_config(const CommonArgs& args) {
  jf::ExperimentConfig cfg = jf::ExperimentConfig::parse_file(args.config_path);
  if (args.seed_override) cfg.seed = *args.seed_override;
  return cfg;
}

std::string out_path(const CommonArgs& args, const std::string& name) {
  return (std::filesystem::path(args.out_dir) / name).string();
}

int cmd_simulate(const CommonArgs& args) {
  const jf::ExperimentConfig cfg = load_config(args);
  const jf::ModelSpec model = jf::make_model(cfg.model_id, cfg.model_params);
  const jf::PathBundle bundle = jf::sample_bundle(
      cfg.T, cfg.dt, model.act0, model.act1,
      jf::BundleDims{model.coeffs.d1, model.coeffs.dprime}, cfg.seed);
  jf::Rng x0rng(jf::derive_seed(cfg.seed, 0x58));
  const jf::Vec x0 = model.pi0_sampler(x0rng);
  const jf::SystemPath path = jf::simulate_system(model.coeffs, x0, model.y0, bundle);

  jf::CsvWriter csv(out_path(args, "path.csv"), cfg.hash(), cfg.seed);
  std::vector<std::string> cols = {"t"};
  for (int i = 0; i < model.coeffs.d; ++i) cols.push_back("X_" + std::to_string(i + 1));
  for (int i = 0; i < model.coeffs.dprime; ++i) cols.push_back("Y_" + std::to_string(i + 1));
  cols.push_back("n0_event");
  cols.push_back("n1_event");
  csv.header(cols);
  auto is_event = [](const std::vector<jf::JumpEvent>& evs, double t) {
    for (const auto& e : evs)
      if (e.time == t) return 1.0;
    return 0.0;
  };
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    std::vector<double> row = {path.times[k]};
    for (int i = 0; i < model.coeffs.d; ++i) row.push_back(path.X[k][i]);
    for (int i = 0; i < model.coeffs.dprime; ++i) row.push_back(path.Y[k][i]);
    row.push_back(is_event(bundle.n0_events, path.times[k]));
    row.push_back(is_event(bundle.n1_events, path.times[k]));
    csv.row(row);
  }
  csv.flush();

  const auto gamma = jf::girsanov_weight_path(model.coeffs, path);
  const auto vtilde = jf::innovation_path(model.coeffs, path);
  jf::CsvWriter aux(out_path(args, "girsanov.csv"), cfg.hash(), cfg.seed);
  std::vector<std::string> acols = {"t", "gamma"};
  for (int i = 0; i < model.coeffs.dprime; ++i)
    acols.push_back("Vtilde_" + std::to_string(i + 1));
  aux.header(acols);
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    std::vector<double> row = {path.times[k], gamma[k]};
    for (int i = 0; i < model.coeffs.dprime; ++i) row.push_back(vtilde[k][i]);
    aux.row(row);
  }
  aux.flush();
  std::cout << "simulate: " << path.times.size() << " grid points, "
            << bundle.n0_events.size() << " N0 events, "
            << bundle.n1_events.size() << " N1 events\n";
  return 0;
}

int cmd_filter(const CommonArgs& args) {
  const jf::ExperimentConfig cfg = load_config(args);
  const jf::ModelSpec model = jf::make_model(cfg.model_id, cfg.model_params);
  const jf::PathBundle bundle = jf::sample_bundle(
      cfg.T, cfg.dt, model.act0, model.act1,
      jf::BundleDims{model.coeffs.d1, model.coeffs.dprime}, cfg.seed);
  jf::Rng x0rng(jf::derive_seed(cfg.seed, 0x58));
  const jf::Vec x0 = model.pi0_sampler(x0rng);
  const jf::SystemPath path = jf::simulate_system(model.coeffs, x0, model.y0, bundle);
  const jf::ObservationRecord obs = jf::observation_record(path);

  jf::FilterOptions fopt;
  fopt.seed = jf::derive_seed(cfg.seed, 0x46);
  fopt.resample = cfg.extra("resample", 0.0) != 0.0;
  jf::FilterState st = jf::init_filter(model.pi0_sampler, cfg.particles, 0.05,
                                       jf::derive_seed(cfg.seed, 0x49));

  jf::CsvWriter moments(out_path(args, "moments.csv"), cfg.hash(), cfg.seed);
  std::vector<std::string> mcols = {"t", "mass", "ess"};
  for (int i = 0; i < model.coeffs.d; ++i) mcols.push_back("mean_" + std::to_string(i + 1));
  for (int i = 0; i < model.coeffs.d; ++i) mcols.push_back("var_" + std::to_string(i + 1));
  moments.header(mcols);

  const std::size_t cells = obs.times.size() - 1;
  const std::size_t stride = std::max<std::size_t>(
      1, static_cast<std::size_t>(cfg.extra("out_every", cells / 100.0)));
  auto emit = [&](const jf::FilterState& s) {
    std::vector<double> row = {s.time, s.unnormalized_mass(),
                               s.effective_sample_size()};
    for (int i = 0; i < model.coeffs.d; ++i)
      row.push_back(jf::normalized_estimate(s, [i](const jf::Vec& x) { return x[i]; }));
    for (int i = 0; i < model.coeffs.d; ++i) {
      const double m = row[3 + i];
      row.push_back(jf::normalized_estimate(
          s, [i, m](const jf::Vec& x) { return (x[i] - m) * (x[i] - m); }));
    }
    moments.row(row);
  };
  emit(st);
  for (std::size_t k = 0; k < cells; k += stride) {
    const std::size_t k1 = std::min(cells, k + stride);
    st = jf::propagate(st, model.coeffs, model.act0, obs, obs.times[k],
                       obs.times[k1], fopt);
    emit(st);
  }
  moments.flush();

  // Mollified output density at T on a lattice; eps_out < 0 derives the
  // scale from the particle spread.
  const double eps_out =
      cfg.eps_out >= 0.0 ? cfg.eps_out : 0.05 * std::max(st.spread(), 1e-6);
  st.eps_out = eps_out;
  jf::write_measure_csv(out_path(args, "particles.csv"), st.measure(),
                        cfg.hash(), cfg.seed);
  const int gn = static_cast<int>(cfg.extra("grid_n", 401.0));
  const double glo = cfg.extra("grid_lo", -6.0), ghi = cfg.extra("grid_hi", 6.0);

  if (model.coeffs.d == 1) {
    jf::CsvWriter dens(out_path(args, "density.csv"), cfg.hash(), cfg.seed);
    dens.comment("eps_out=" + jf::format_g17(eps_out));
    dens.header({"x", "density", "unnormalized"});
    jf::Vec xv(1);
    for (int j = 0; j < gn; ++j) {
      xv[0] = glo + (ghi - glo) * j / (gn - 1);
      dens.row({xv[0], jf::density_estimate(st, xv, true),
                jf::density_estimate(st, xv, false)});
    }
    dens.flush();

    // Optional grid-solver oracle in d = d' = 1.
    if (cfg.extra("grid_n", 0.0) > 0.0) {
      std::vector<double> xg(gn), pi0(gn);
      for (int j = 0; j < gn; ++j) {
        xg[j] = glo + (ghi - glo) * j / (gn - 1);
        const double s = model.pi0_std;
        const double u = xg[j] - model.x0_mean[0];
        pi0[j] = std::exp(-0.5 * u * u / (s * s)) / (s * std::sqrt(2.0 * M_PI));
      }
      const jf::GridSolverResult grid = jf::reference_grid_solver(
          model.coeffs, model.act0, obs, xg, pi0, {});
      jf::CsvWriter gcsv(out_path(args, "grid_density.csv"), cfg.hash(), cfg.seed);
      gcsv.header({"x", "density"});
      const double gm = grid.mass.back();
      for (int j = 0; j < gn; ++j)
        gcsv.row({xg[j], grid.final_density()[j] / gm});
      gcsv.flush();

      double l1 = 0.0;
      const double pmass = st.unnormalized_mass();
      const jf::ParticleMeasure mu = st.measure();
      for (int j = 0; j + 1 < gn; ++j) {
        jf::Vec a(1), b(1);
        a << xg[j], b << xg[j + 1];
        const double f0 = jf::mollify(mu, eps_out, a) / pmass -
                          grid.final_density()[j] / gm;
        const double f1 = jf::mollify(mu, eps_out, b) / pmass -
                          grid.final_density()[j + 1] / gm;
        l1 += 0.5 * (xg[j + 1] - xg[j]) * (std::abs(f0) + std::abs(f1));
      }
      json summary;
      summary["config_hash"] = cfg.hash();
      summary["seed"] = cfg.seed;
      summary["mass_particle"] = pmass;
      summary["mass_grid"] = gm;
      summary["l1_distance"] = l1;
      jf::write_file(out_path(args, "summary.json"), summary.dump(2) + "\n");
      std::cout << "filter: L1(particle, grid) = " << l1 << "\n";
    }
  }
  std::cout << "filter: final mass " << st.unnormalized_mass() << ", ESS "
            << st.effective_sample_size() << "\n";
  return 0;
}

json verifier_record(const std::string& lemma, std::uint64_t inputs_hash,
                     double lhs, double rhs, double ratio, bool ok) {
  json rec;
  rec["lemma"] = lemma;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(inputs_hash));
  rec["inputs_hash"] = buf;
  rec["lhs"] = lhs;
  rec["rhs"] = rhs;
  rec["ratio"] = ratio;
  rec["ok"] = ok;
  return rec;
}

int cmd_verify_lemmas(const CommonArgs& args) {
  const jf::ExperimentConfig cfg = load_config(args);
  const jf::ModelSpec model = jf::make_model(cfg.model_id, cfg.model_params);
  const int instances = static_cast<int>(cfg.extra("instances", 20.0));
  jf::Rng rng(jf::derive_seed(cfg.seed, 0x4c45));

  const jf::Vec y0 = model.y0;
  auto sigma_fn = [&](const jf::Vec& x) { return model.coeffs.sigma(0.0, x, y0); };
  auto b_fn = [&](const jf::Vec& x) { return model.coeffs.b(0.0, x, y0); };

  json records = json::array();
  bool all_ok = true;
  for (int i = 0; i < instances; ++i) {
    const int m = 1 + static_cast<int>(rng.uniform() * 4);
    jf::ParticleMeasure mu(model.coeffs.d);
    for (int a = 0; a < m; ++a) {
      jf::Vec x(model.coeffs.d);
      for (int j = 0; j < model.coeffs.d; ++j) x[j] = rng.uniform(-1.5, 1.5);
      mu.add(x, rng.uniform(-1.0, 1.0));
    }
    const double eps = rng.uniform(0.3, 1.0);
    const std::uint64_t ih = jf::derive_seed(cfg.seed, 0x4c45, i);

    const jf::Pe1Report p1 = jf::verify_pe1(sigma_fn, b_fn, mu, eps, cfg.p);
    records.push_back(verifier_record("pe1_A", ih, p1.lhs_A,
                                      p1.lipschitz * p1.lipschitz * p1.rhs_scale,
                                      p1.ratio_A, std::isfinite(p1.ratio_A)));
    records.push_back(verifier_record("pe2_B", ih, p1.lhs_B,
                                      p1.lipschitz * p1.lipschitz * p1.rhs_scale,
                                      p1.ratio_B, std::isfinite(p1.ratio_B)));

    auto sig_v = [&](const jf::Vec& x) {
      const jf::Mat s = model.coeffs.sigma(0.0, x, y0);
      return jf::Vec(s.col(0));
    };
    auto b_s = [&](const jf::Vec& x) { return model.coeffs.B(0.0, x, y0)[0]; };
    const jf::Pe4Report p4 = jf::verify_pe4(sig_v, b_s, mu, eps, cfg.p);
    records.push_back(
        verifier_record("pe4_1", ih, p4.lhs_1, p4.rhs_1,
                        p4.rhs_1 > 0 ? p4.lhs_1 / p4.rhs_1 : 0.0, p4.sharp_bound_ok));
    records.push_back(verifier_record("pe4_2", ih, p4.lhs_2,
                                      p4.K * p4.lipschitz * p4.rhs_scale,
                                      p4.ratio_2, std::isfinite(p4.ratio_2)));
    all_ok = all_ok && p4.sharp_bound_ok;

    if (model.act1) {
      const jf::Vec mark = model.act1->mark_quadrature.front().first;
      jf::ShiftMap sh = jf::ShiftMap::from_xi(model.coeffs, 0.0, y0, mark);
      const jf::Pe3Report p3 = jf::verify_pe3(sh, mu, eps, cfg.p);
      records.push_back(verifier_record(
          "pe3_C", ih, p3.C_exact,
          (1.0 + p3.lipschitz * p3.lipschitz) * p3.lipschitz * p3.lipschitz *
              p3.rhs_scale,
          p3.bound_ratio, p3.agreement <= 1e-6 * std::max(1.0, std::abs(p3.C_exact))));
      const jf::JumpNormReport jn = jf::verify_J_and_76(sh, mu, eps, cfg.p);
      records.push_back(verifier_record("7.6.2_D", ih, jn.D_exact,
                                        (1.0 + jn.lipschitz) * jn.lipschitz *
                                            jn.rhs_scale,
                                        jn.ratio_D, jn.convexity_ok));
      all_ok = all_ok && jn.convexity_ok;
    }
  }
  json doc;
  doc["config_hash"] = cfg.hash();
  doc["seed"] = cfg.seed;
  doc["records"] = records;
  jf::write_file(out_path(args, "lemmas.json"), doc.dump(2) + "\n");
  std::cout << "verify-lemmas: " << records.size() << " records, "
            << (all_ok ? "all ok" : "violations present") << "\n";
  return all_ok ? 0 : 2;
}

int cmd_verify_adjoints(const CommonArgs& args) {
  const jf::ExperimentConfig cfg = load_config(args);
  const int instances = static_cast<int>(cfg.extra("instances", 20.0));
  jf::Rng rng(jf::derive_seed(cfg.seed, 0x4144));

  json records = json::array();
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    const int d = 1 + (i % 2);
    // Smooth sine shift with analytic Jacobian, Lipschitz below 0.35.
    jf::Vec c(d), a(d), s(d);
    jf::Mat omega(d, d);
    for (int j = 0; j < d; ++j) {
      c[j] = rng.uniform(-0.5, 0.5);
      a[j] = rng.uniform(0.05, 0.3) / d;
      s[j] = rng.uniform(0.0, 6.28);
      for (int jj = 0; jj < d; ++jj) omega(j, jj) = rng.uniform(-1.0, 1.0);
    }
    jf::ShiftMap sh;
    sh.dim = d;
    sh.lip = 0.5;
    sh.lambda = 0.5;
    sh.zeta = [c, a, omega, s, d](const jf::Vec& x) {
      jf::Vec z(d);
      for (int j = 0; j < d; ++j)
        z[j] = c[j] + a[j] * std::sin(omega.row(j).dot(x) + s[j]);
      return z;
    };
    sh.jacobian = [a, omega, s, d](const jf::Vec& x) {
      jf::Mat jm(d, d);
      for (int j = 0; j < d; ++j) {
        const double cs = a[j] * std::cos(omega.row(j).dot(x) + s[j]);
        for (int jj = 0; jj < d; ++jj) jm(j, jj) = cs * omega(j, jj);
      }
      return jm;
    };
    jf::Vec cphi(d), cpsi(d);
    for (int j = 0; j < d; ++j) {
      cphi[j] = rng.uniform(-0.8, 0.8);
      cpsi[j] = rng.uniform(-0.8, 0.8);
    }
    const jf::TestFunction phi = jf::TestFunction::bump(cphi, 2.0);
    const jf::TestFunction psi = jf::TestFunction::bump(cpsi, 2.0);

    const char* names[3] = {"T", "I", "J"};
    const jf::AdjointKind kinds[3] = {jf::AdjointKind::T, jf::AdjointKind::I,
                                      jf::AdjointKind::J};
    for (int kk = 0; kk < 3; ++kk) {
      jf::Vec lo = cphi.array() - phi.support_radius;
      jf::Vec hi = cphi.array() + phi.support_radius;
      const jf::AdjointKind kind = kinds[kk];
      const double lhs = jf::integrate_box(
          [&](const jf::Vec& x) {
            switch (kind) {
              case jf::AdjointKind::T:
                return phi.value(x) * jf::apply_T(sh.zeta, psi, x);
              case jf::AdjointKind::I:
                return phi.value(x) * jf::apply_I(sh.zeta, psi, x);
              default:
                return phi.value(x) * jf::apply_J(sh.zeta, psi, x);
            }
          },
          lo, hi, 1e-9);
      lo = cpsi.array() - psi.support_radius;
      hi = cpsi.array() + psi.support_radius;
      const double rhs = jf::integrate_box(
          [&](const jf::Vec& x) {
            return jf::adjoint_apply(sh, kind, phi, x, 1e-12) * psi.value(x);
          },
          lo, hi, 1e-9);
      const double rel =
          std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-3});
      worst = std::max(worst, rel);
      json rec;
      rec["kind"] = names[kk];
      rec["d"] = d;
      rec["lhs"] = lhs;
      rec["rhs"] = rhs;
      rec["rel_error"] = rel;
      records.push_back(rec);
    }
  }
  json doc;
  doc["config_hash"] = cfg.hash();
  doc["seed"] = cfg.seed;
  doc["max_rel_error"] = worst;
  doc["records"] = records;
  jf::write_file(out_path(args, "adjoints.json"), doc.dump(2) + "\n");
  std::cout << "verify-adjoints: max relative duality error " << worst << "\n";
  return worst <= 1e-7 ? 0 : 2;
}

int cmd_benchmark(const CommonArgs& args, const std::string& only,
                  const std::string& self_path) {
  jf::AcceptanceOptions opt;
  opt.threads = args.threads;
  opt.cli_path = self_path;
  opt.work_dir = args.out_dir + "/acceptance-work";
  if (!only.empty()) {
    std::stringstream ss(only);
    std::string tok;
    while (std::getline(ss, tok, ',')) opt.only.push_back(std::stoi(tok));
  }
  const auto results = jf::run_acceptance(opt);
  std::cout << jf::render_acceptance_table(results);
  jf::write_file((std::filesystem::path(args.out_dir) / "benchmark.txt").string(),
                 jf::render_acceptance_table(results, /*include_timing=*/false));
  return jf::all_passed(results) ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear filtering for partially observed jump diffusions"};
  app.require_subcommand(1);

  CommonArgs args;
  args.threads = default_threads();
  std::string only;

  auto add_common = [&](CLI::App* sub, bool need_config) {
    if (need_config)
      sub->add_option("--config", args.config_path, "config file")->required();
    sub->add_option("--out-dir", args.out_dir, "artifact directory");
    sub->add_option("--seed", args.seed_override, "override config seed");
    sub->add_option("--threads", args.threads, "worker threads");
  };

  CLI::App* sim = app.add_subcommand("simulate", "simulate signal/observation paths");
  add_common(sim, true);
  CLI::App* fil = app.add_subcommand("filter", "particle filter, optional grid oracle");
  add_common(fil, true);
  CLI::App* vl = app.add_subcommand("verify-lemmas", "mollified-estimate lemma suite");
  add_common(vl, true);
  CLI::App* va = app.add_subcommand("verify-adjoints", "adjoint duality suite");
  add_common(va, true);
  CLI::App* bm = app.add_subcommand("benchmark", "acceptance criteria suite");
  add_common(bm, false);
  bm->add_option("--only", only, "comma-separated criterion ids");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(args);
    if (fil->parsed()) return cmd_filter(args);
    if (vl->parsed()) return cmd_verify_lemmas(args);
    if (va->parsed()) return cmd_verify_adjoints(args);
    if (bm->parsed()) return cmd_benchmark(args, only, argv[0]);
  } catch (const jf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const jf::ContractViolation& e) {
    std::cerr << "invalid request: " << e.what() << "\n";
    return 1;
  } catch (const jf::BudgetExceeded& e) {
    std::cerr << "invalid request: " << e.what() << "\n";
    return 1;
  } catch (const jf::UnsupportedDimension& e) {
    std::cerr << "invalid request: " << e.what() << "\n";
    return 1;
  } catch (const jf::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
