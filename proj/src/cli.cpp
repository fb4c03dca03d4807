#include "ltt/cli.hpp"

#include "ltt/dataset_io.hpp"
#include "ltt/errors.hpp"
#include "ltt/experiments.hpp"
#include "ltt/results_io.hpp"
#include "ltt/theory.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#ifndef LTT_VERSION
#define LTT_VERSION "dev"
#endif

namespace ltt {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options shared by every subcommand.
struct Common {
  std::string config;
  std::string out = "results";
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct ModelOpts {
  std::string prior = "point";
  double gamma = 0.2;
  double c = 0.2;
  double h = 4.0;
  std::size_t m = 1000;
  double q = 0.1;
  bool random_direction = false;
};

std::uint64_t default_seed() {
  if (const char* s = std::getenv("LTT_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw UsageError(std::string("LTT_SEED is not an unsigned integer: ") + s);
    }
  }
  return 1;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON config file; keys are long flag names, flags override it");
  app->add_option("--out", c.out, "Output directory");
  app->add_option("--seed", c.seed, "Base seed (falls back to $LTT_SEED, then 1)");
  app->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

void add_model(CLI::App* app, ModelOpts& o, bool with_m = true) {
  app->add_option("--prior", o.prior, "Alternative prior: point or subspace")
      ->check(CLI::IsMember({"point", "subspace"}));
  app->add_option("--gamma", o.gamma, "Non-null proportion")->check(CLI::Range(0.0, 1.0));
  app->add_option("--c", o.c, "Aspect ratio d/m")->check(CLI::PositiveNumber);
  app->add_option("--h", o.h, "Signal strength")->check(CLI::NonNegativeNumber);
  if (with_m) app->add_option("--m", o.m, "Number of hypotheses")->check(CLI::PositiveNumber);
  app->add_option("--q", o.q, "Nominal FDR level")->check(CLI::Range(1e-12, 1.0 - 1e-12));
  if (with_m) app->add_flag("--random-direction", o.random_direction, "Draw a random unit v instead of e_1");
}

ModelParams build_params(const ModelOpts& o, std::uint64_t seed) {
  ModelParams p = ModelParams::make(parse_prior(o.prior), o.gamma, o.c, o.h, o.m, o.q);
  if (o.random_direction) p.v = random_unit_vector(p.d, RngStream(seed, {0xd1ec7104ULL}));
  return p;
}

// "a:b:step" or a comma list.
std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  auto num = [&](const std::string& t) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(t, &pos);
      if (pos != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw UsageError("cannot parse grid value '" + t + "'");
    }
  };
  if (s.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw UsageError("grid range must be lo:hi:step");
    const double lo = num(parts[0]), hi = num(parts[1]), step = num(parts[2]);
    if (!(step > 0.0) || hi < lo) throw UsageError("grid range needs lo <= hi and step > 0");
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(std::round((lo + step * static_cast<double>(i)) * 1e12) / 1e12);
  } else {
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) out.push_back(num(item));
    }
  }
  if (out.empty()) throw UsageError("empty grid");
  return out;
}

void check_open_unit(const std::vector<double>& g, const std::string& what) {
  for (double x : g) {
    if (!(x > 0.0 && x < 1.0)) throw UsageError(what + " values must lie in (0, 1); got " + fmt6(x));
  }
}

void check_half_open_unit(const std::vector<double>& g, const std::string& what) {
  for (double x : g) {
    if (!(x > 0.0 && x <= 1.0)) throw UsageError(what + " values must lie in (0, 1]; got " + fmt6(x));
  }
}

LearnerKind resolve_learner(const std::string& s, Prior prior) {
  if (s == "auto") return prior == Prior::PointMass ? LearnerKind::Mean : LearnerKind::PCA;
  return parse_learner(s);
}

// Resolved values of every option on a subcommand, usable as a config file.
json resolved_config(const CLI::App* sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    if (opt->get_expected_min() == 0) {
      cfg[name] = opt->count() > 0 && opt->as<bool>();
      continue;
    }
    cfg[name] = opt->count() > 0 ? opt->results().back() : opt->get_default_str();
  }
  return cfg;
}

void write_manifest(const std::string& out_dir, const CLI::App* sub, std::uint64_t seed, double wall_seconds,
                    const std::vector<std::string>& files) {
  json man;
  man["command"] = sub->get_name();
  json cfg = resolved_config(sub);
  cfg["seed"] = std::to_string(seed);
  man["config"] = cfg;
  man["seed"] = seed;
  man["version"] = LTT_VERSION;
  man["wall_time_seconds"] = wall_seconds;
  man["outputs"] = files;
  man["note"] = "q is the nominal FDR level; default 0.1";
  write_text_file((fs::path(out_dir) / "manifest.json").string(), man.dump(2) + "\n");
}

std::string token_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + token_value(v[i]);
    return s;
  }
  return v.dump();
}

// Turns a JSON config (or a previous run's manifest) into flag tokens that are
// placed before the user's own flags, so explicit flags win.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("config file not found: " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const std::exception& e) {
    throw UsageError("config file is not valid JSON: " + std::string(e.what()));
  }
  if (j.contains("config") && j.contains("version")) j = j["config"];
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  std::vector<std::string> toks;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.value().is_boolean()) {
      if (it.value().get<bool>()) toks.push_back("--" + it.key());
      continue;
    }
    if (it.value().is_null()) continue;
    toks.push_back("--" + it.key());
    toks.push_back(token_value(it.value()));
  }
  return toks;
}

std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string cfg;
  std::size_t at = args.size();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      cfg = args[i + 1];
      at = i;
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      cfg = args[i].substr(9);
      at = i;
      break;
    }
  }
  if (cfg.empty()) return args;
  if (args.empty() || args[0].rfind("-", 0) == 0) throw UsageError("--config must follow a subcommand");
  std::vector<std::string> toks = config_tokens(cfg);
  (void)at;
  std::vector<std::string> out{args[0]};
  out.insert(out.end(), toks.begin(), toks.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string out_file(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

}  // namespace

int parse_and_dispatch(int argc, char** argv) {
  CLI::App app{"Learn-then-test simulation and theory toolkit (ltt " LTT_VERSION ")"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();

  Common common;
  try {
    common.seed = default_seed();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  ModelOpts model;

  auto make_sub = [&](const std::string& name, const std::string& desc) {
    CLI::App* s = app.add_subcommand(name, desc);
    s->set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
    s->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
    add_common(s, common);
    return s;
  };

  // theory-eval
  std::string th_method = "all", th_grid = "0.05:0.95:0.05";
  CLI::App* th = make_sub("theory-eval", "Print closed-form alignment, signal strength and BH power");
  add_model(th, model, false);
  th->add_option("--method", th_method, "split, bonus, insample or all")
      ->check(CLI::IsMember({"all", "split", "bonus", "insample"}));
  th->add_option("--grid", th_grid, "Tuning grid for split/bonus, lo:hi:step or comma list");

  // simulate
  std::string sim_method = "bonus", sim_learner = "auto";
  double sim_pi = 0.5;
  std::size_t sim_mtilde = 0, sim_B = 0;
  bool sim_fixed = false, sim_dump = false;
  CLI::App* sim = make_sub("simulate", "Run one procedure on one simulated dataset");
  add_model(sim, model);
  sim->add_option("--method", sim_method, "split, bonus, insample, crt, knockoff-vanilla or knockoff-mlr")
      ->check(CLI::IsMember({"split", "bonus", "insample", "crt", "knockoff-vanilla", "knockoff-mlr"}));
  sim->add_option("--learner", sim_learner, "mean, pca or auto (mean for point, pca for subspace)")
      ->check(CLI::IsMember({"auto", "mean", "pca"}));
  sim->add_option("--pi", sim_pi, "pi_split for split, pi_aug for bonus");
  sim->add_option("--mtilde", sim_mtilde, "Null pool size for bonus (0: derived from --pi)");
  sim->add_option("--B", sim_B, "Resamples for insample/crt (0: 50000 point, 10000 subspace, 500 crt)");
  sim->add_flag("--fixed-learner", sim_fixed, "In-sample resampling without refitting the learner");
  sim->add_flag("--dump-dataset", sim_dump, "Also write dataset.bin / dataset.json");

  // power-curve
  std::string pc_method = "all", pc_grid = "0.05:0.95:0.05", pc_learner = "auto";
  std::size_t pc_reps = 1000, pc_B = 0;
  CLI::App* pc = make_sub("power-curve", "Monte Carlo power and FDP against the tuning parameter");
  add_model(pc, model);
  pc->add_option("--method", pc_method, "Comma list of split, bonus, insample, crt, knockoff-vanilla, knockoff-mlr; all = split,bonus,insample");
  pc->add_option("--grid", pc_grid, "pi grid, lo:hi:step or comma list");
  pc->add_option("--reps", pc_reps, "Replications per grid point")->check(CLI::Range(2, 100000000));
  pc->add_option("--learner", pc_learner, "mean, pca or auto")->check(CLI::IsMember({"auto", "mean", "pca"}));
  pc->add_option("--B", pc_B, "Resamples for insample/crt (0: per-prior default)");

  // align-curve
  std::string al_masking = "all", al_grid = "0.1:0.9:0.1", al_learner = "auto";
  std::size_t al_reps = 1000;
  CLI::App* al = make_sub("align-curve", "Alignment of the learned direction against the masking proportion");
  add_model(al, model);
  al->add_option("--masking", al_masking, "split, augment or all")->check(CLI::IsMember({"all", "split", "augment"}));
  al->add_option("--grid", al_grid, "pi grid in (0, 1]");
  al->add_option("--reps", al_reps, "Replications per grid point")->check(CLI::Range(2, 100000000));
  al->add_option("--learner", al_learner, "mean, pca or auto")->check(CLI::IsMember({"auto", "mean", "pca"}));

  // mtilde-search and mtilde-scaling share the search options
  MtildeSearchOptions sopts;
  std::string se_mode = "running-max";
  std::size_t s_cap = 0;
  std::size_t ms_reps = 500;
  std::size_t ms_stride = 1, sc_stride = 2;
  auto add_search = [&](CLI::App* s, std::size_t& stride) {
    s->add_option("--start", sopts.start, "First m_tilde")->check(CLI::PositiveNumber);
    s->add_option("--stride", stride, "Step between evaluated m_tilde values")->check(CLI::PositiveNumber);
    s->add_option("--patience", sopts.patience, "Consecutive evaluations below max - 2 SE before stopping")
        ->check(CLI::PositiveNumber);
    s->add_option("--se-mode", se_mode, "SE used by the stop rule: running-max or current")
        ->check(CLI::IsMember({"running-max", "current"}));
    s->add_option("--cap", s_cap, "Largest m_tilde (0: 20 sqrt(m))");
    s->add_option("--reps", ms_reps, "Replications per evaluated m_tilde")->check(CLI::Range(100, 100000000));
  };
  CLI::App* ms = make_sub("mtilde-search", "Adaptive search for the power-maximizing BONuS pool size");
  add_model(ms, model);
  add_search(ms, ms_stride);

  std::size_t sc_mmin = 500, sc_mmax = 2500, sc_count = 6;
  bool full_scale = false;
  CLI::App* sc = make_sub("mtilde-scaling", "Optimal pool size across m with a log-log slope fit");
  add_model(sc, model, false);
  add_search(sc, sc_stride);
  sc->add_option("--m-min", sc_mmin, "Smallest m")->check(CLI::PositiveNumber);
  sc->add_option("--m-max", sc_mmax, "Largest m")->check(CLI::PositiveNumber);
  sc->add_option("--m-count", sc_count, "Number of log-spaced m values")->check(CLI::Range(3, 100000));
  sc->add_flag("--full-scale", full_scale, "Full design: 50 m values, 5000 reps, stride 1 (hours)");

  // knockoff-compare
  std::string kc_hgrid = "2,3,4,5";
  std::size_t kc_reps = 500, kc_B = 0;
  CLI::App* kc = make_sub("knockoff-compare", "Knockoff statistics against split, BONuS and in-sample BH");
  add_model(kc, model);
  kc->add_option("--h-grid", kc_hgrid, "Signal strengths, lo:hi:step or comma list");
  kc->add_option("--reps", kc_reps, "Replications per method and h")->check(CLI::Range(2, 100000000));
  kc->add_option("--B", kc_B, "In-sample resamples (0: per-prior default)");

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  CLI::App* sub = app.get_subcommands().front();
  try {
    fs::create_directories(common.out);
    std::vector<std::string> files;

    if (sub == th) {
      const Prior prior = parse_prior(model.prior);
      std::vector<double> grid = parse_grid(th_grid);
      check_open_unit(grid, "--grid");
      std::vector<TheoryPoint> pts;
      for (const std::string mname : {"split", "bonus", "insample"}) {
        if (th_method != "all" && th_method != mname) continue;
        if (mname == "insample") {
          pts.push_back(theory_point(prior, model.gamma, model.c, model.h, model.q, TheoryMethod::InSample));
          continue;
        }
        const TheoryMethod tm = mname == "split" ? TheoryMethod::Split : TheoryMethod::Bonus;
        for (double pi : grid) pts.push_back(theory_point(prior, model.gamma, model.c, model.h, model.q, tm, pi));
      }
      const std::string csv = theory_csv(pts);
      std::cout << csv;
      write_text_file(out_file(common.out, "theory_eval.csv"), csv);
      files.push_back("theory_eval.csv");
    } else if (sub == sim) {
      const ModelParams p = build_params(model, common.seed);
      const RngStream stream(common.seed, {0, 0});
      const Dataset data = generate_dataset(p, stream.child(0));
      MethodSpec spec;
      spec.method = parse_method(sim_method);
      spec.learner = resolve_learner(sim_learner, p.prior);
      spec.B = sim_B;
      spec.insample_mode = sim_fixed ? InSampleMode::FixedLearner : InSampleMode::SwapRetrain;
      RejectionResult res;
      if (spec.method == Method::Bonus && sim_mtilde > 0) {
        res = bonus(data, sim_mtilde, spec.learner, p.q, stream.child(1));
      } else {
        if (spec.method == Method::SplitBH || spec.method == Method::Bonus) check_open_unit({sim_pi}, "--pi");
        res = run_method(spec, sim_pi, data, p.q, stream.child(1));
      }
      json j = to_json(res, p);
      write_text_file(out_file(common.out, "rejection.json"), j.dump(2) + "\n");
      files.push_back("rejection.json");
      if (sim_dump) {
        dump_dataset(data, out_file(common.out, "dataset"));
        files.push_back("dataset.bin");
        files.push_back("dataset.json");
      }
      std::cout << j.dump() << '\n';
    } else if (sub == pc) {
      ExperimentConfig cfg;
      cfg.params = build_params(model, common.seed);
      cfg.reps = pc_reps;
      cfg.base_seed = common.seed;
      cfg.threads = common.threads;
      const std::vector<double> grid = parse_grid(pc_grid);
      std::vector<std::string> names;
      {
        std::stringstream ss(pc_method == "all" ? std::string("split,bonus,insample") : pc_method);
        std::string item;
        while (std::getline(ss, item, ',')) names.push_back(item);
      }
      for (const auto& n : names) {
        MethodSpec spec;
        try {
          spec.method = parse_method(n);
        } catch (const DomainError& e) {
          throw UsageError(e.what());
        }
        spec.learner = resolve_learner(pc_learner, cfg.params.prior);
        spec.B = pc_B;
        if (spec.method == Method::SplitBH || spec.method == Method::Bonus) {
          check_open_unit(grid, "--grid");
          spec.grid = grid;
        }
        cfg.methods.push_back(spec);
      }
      const auto recs = run_replications(cfg);
      write_text_file(out_file(common.out, "power_curve.csv"), power_curve_csv(recs));
      files.push_back("power_curve.csv");
    } else if (sub == al) {
      const ModelParams p = build_params(model, common.seed);
      const std::vector<double> grid = parse_grid(al_grid);
      check_half_open_unit(grid, "--grid");
      const LearnerKind lk = resolve_learner(al_learner, p.prior);
      std::vector<AlignmentRecord> recs;
      if (al_masking != "augment") {
        auto r = alignment_curve(p, MaskingKind::Split, grid, al_reps, lk, common.seed, common.threads);
        recs.insert(recs.end(), r.begin(), r.end());
      }
      if (al_masking != "split") {
        auto r = alignment_curve(p, MaskingKind::Augment, grid, al_reps, lk, common.seed, common.threads);
        recs.insert(recs.end(), r.begin(), r.end());
      }
      write_text_file(out_file(common.out, "align_curve.csv"), align_curve_csv(recs));
      files.push_back("align_curve.csv");
    } else if (sub == ms || sub == sc) {
      sopts.se_mode = se_mode == "current" ? SeMode::Current : SeMode::RunningMax;
      sopts.stride = sub == ms ? ms_stride : sc_stride;
      if (s_cap > 0) sopts.cap = s_cap;
      ModelOpts mo = model;
      std::vector<MtildeSearchResult> results;
      ExpansionCoeffs coeffs{};
      if (sub == ms) {
        const ModelParams p = build_params(mo, common.seed);
        results.push_back(adaptive_mtilde_search(p.m, p, p.q, ms_reps, sopts, common.seed, 0, common.threads));
        coeffs = p.prior == Prior::PointMass ? expansion_coeffs_point(p.gamma, p.c(), p.h, p.q)
                                             : expansion_coeffs_subspace(p.gamma, p.c(), p.h, p.q);
        write_text_file(out_file(common.out, "mtilde_search.csv"), mtilde_summary_csv(results, coeffs, p.q));
        files.push_back("mtilde_search.csv");
      } else {
        std::size_t count = sc_count, reps = ms_reps;
        if (full_scale) {
          count = 50;
          reps = 5000;
          sopts.stride = 1;
        }
        if (sc_mmax < sc_mmin) throw UsageError("--m-max must be >= --m-min");
        mo.m = sc_mmin;
        const ModelParams p = build_params(mo, common.seed);
        const auto m_values = log_spaced_counts(static_cast<double>(sc_mmin), static_cast<double>(sc_mmax), count);
        const ScalingResult sr = mtilde_scaling(p, m_values, reps, sopts, common.seed, common.threads);
        results = sr.searches;
        coeffs = sr.coeffs;
        write_text_file(out_file(common.out, "mtilde_scaling.csv"), mtilde_summary_csv(results, coeffs, p.q));
        write_text_file(out_file(common.out, "mtilde_fit.csv"), mtilde_fit_csv(sr.fit, p.q));
        files.push_back("mtilde_scaling.csv");
        files.push_back("mtilde_fit.csv");
      }
      write_text_file(out_file(common.out, "mtilde_evaluations.csv"), mtilde_evaluations_csv(results));
      files.push_back("mtilde_evaluations.csv");
    } else if (sub == kc) {
      const ModelParams p = build_params(model, common.seed);
      const std::vector<double> hs = parse_grid(kc_hgrid);
      for (double h : hs) {
        if (!(h > 0.0)) throw UsageError("--h-grid values must be positive");
      }
      const auto recs = knockoff_comparison(p, hs, kc_reps, common.seed, common.threads, kc_B);
      write_text_file(out_file(common.out, "knockoff_compare.csv"), knockoff_compare_csv(recs));
      files.push_back("knockoff_compare.csv");
    }
    write_manifest(common.out, sub, common.seed, seconds_since(t0), files);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << sub->help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace ltt
