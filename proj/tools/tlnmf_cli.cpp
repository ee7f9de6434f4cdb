// Command-line entry points: dataset generation, single solver runs, and the
// experiment drivers (gap decay, atom recovery, matched-budget complexity,
// convergence rate). All outputs are CSV.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include "CLI11.hpp"

#include "tlnmf/csv.hpp"
#include "tlnmf/experiments.hpp"
#include "tlnmf/objectives.hpp"
#include "tlnmf/solvers.hpp"

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace tlnmf;

namespace {

struct CliOptions {
  std::string dataset = "gcm";
  std::string config_file;
  std::string out_dir = "out";
  std::string data_dir;  // optional pre-generated bundle
  std::optional<std::uint64_t> seed;
  std::optional<int> S;
  int threads = 1;
  bool substep_trace = false;
  bool mu_verbatim = false;
  std::string s_grid = "1,3,10,30,100,300,1000,3000";
  std::string j_grid;
  int trials = 20;
  int J_max = 100;
};

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  std::string token;
  for (const char c : text + ",") {
    if (c == ',') {
      if (!token.empty()) values.push_back(std::stoi(token));
      token.clear();
    } else {
      token += c;
    }
  }
  if (values.empty()) throw ConfigError("empty integer list: '" + text + "'");
  return values;
}

// Table-of-experiments defaults per dataset, overridable by --config keys.
struct FullConfig {
  SolverConfig solver;
  GcmSpec gcm;
  NotesSpec notes;
};

FullConfig load_config(const CliOptions& cli) {
  FullConfig cfg;
  if (cli.dataset == "gcm") {
    cfg.solver.K = 5;
    cfg.solver.eps0 = 1e-8;
    cfg.solver.J = 1000;
    cfg.solver.P = 100;
  } else if (cli.dataset == "notes") {
    cfg.solver.K = 2;
    cfg.solver.eps0 = 5e-7;
    cfg.solver.J = 100;
    cfg.solver.P = 10;
  } else {
    throw ConfigError("unknown dataset '" + cli.dataset + "' (expected gcm or notes)");
  }
  cfg.solver.J_TL = 1;
  cfg.solver.J_NMF = 10;

  if (!cli.config_file.empty()) {
    const KeyValues kv = read_key_values(cli.config_file);
    const auto geti = [&](const char* key, int& out) {
      if (kv.count(key)) out = std::stoi(kv.at(key));
    };
    const auto getd = [&](const char* key, double& out) {
      if (kv.count(key)) out = std::stod(kv.at(key));
    };
    const auto getu = [&](const char* key, std::uint64_t& out) {
      if (kv.count(key)) out = std::stoull(kv.at(key));
    };
    geti("K", cfg.solver.K);
    getd("eps0", cfg.solver.eps0);
    geti("J", cfg.solver.J);
    geti("J_TL", cfg.solver.J_TL);
    geti("J_NMF", cfg.solver.J_NMF);
    geti("P", cfg.solver.P);
    getu("seed", cfg.solver.seed);
    geti("M", cfg.gcm.M);
    geti("N", cfg.gcm.N);
    geti("K_bar", cfg.gcm.K_bar);
    getd("a", cfg.gcm.a);
    getd("theta", cfg.gcm.theta);
    geti("S", cfg.gcm.S);
    geti("T", cfg.notes.T);
    getd("f0", cfg.notes.f0);
    getd("f1", cfg.notes.f1);
    getd("f2", cfg.notes.f2);
    geti("R", cfg.notes.R);
    geti("frame_len", cfg.notes.frame_len);
    geti("hop", cfg.notes.hop);
    if (kv.count("S")) cfg.notes.S = std::stoi(kv.at("S"));
  }
  if (cli.seed) {
    cfg.solver.seed = *cli.seed;
    cfg.gcm.seed = *cli.seed;
    cfg.notes.seed = *cli.seed;
  } else {
    cfg.gcm.seed = cfg.solver.seed;
    cfg.notes.seed = cfg.solver.seed;
  }
  if (cli.S) {
    cfg.gcm.S = *cli.S;
    cfg.notes.S = *cli.S;
  }
  return cfg;
}

DatasetSpec dataset_spec(const CliOptions& cli, const FullConfig& cfg) {
  if (cli.dataset == "gcm") return DatasetSpec{cfg.gcm};
  return DatasetSpec{cfg.notes};
}

RealizationSet load_or_generate(const CliOptions& cli, const FullConfig& cfg) {
  if (!cli.data_dir.empty()) return read_realizations(cli.data_dir);
  if (cli.dataset == "gcm") return gen_gcm(cfg.gcm).first;
  return gen_notes(cfg.notes);
}

int run_gen(const CliOptions& cli) {
  const FullConfig cfg = load_config(cli);
  const fs::path out(cli.out_dir);
  if (cli.dataset == "gcm") {
    const auto [data, truth] = gen_gcm(cfg.gcm);
    KeyValues fields = {{"kind", "gcm"},
                        {"K_bar", std::to_string(cfg.gcm.K_bar)},
                        {"a", format_double(cfg.gcm.a)},
                        {"theta", format_double(cfg.gcm.theta)},
                        {"seed", std::to_string(cfg.gcm.seed)}};
    write_realizations(out / "data", data, fields);
    write_ground_truth(out / "truth", truth);
  } else {
    const RealizationSet data = gen_notes(cfg.notes);
    KeyValues fields = {{"kind", "notes"},
                        {"f0", format_double(cfg.notes.f0)},
                        {"f1", format_double(cfg.notes.f1)},
                        {"f2", format_double(cfg.notes.f2)},
                        {"frame_len", std::to_string(cfg.notes.frame_len)},
                        {"hop", std::to_string(cfg.notes.hop)},
                        {"seed", std::to_string(cfg.notes.seed)}};
    write_realizations(out / "data", data, fields);
  }
  std::printf("wrote dataset bundle under %s\n", out.string().c_str());
  return 0;
}

int run_solver(const CliOptions& cli, bool tl) {
  const FullConfig cfg = load_config(cli);
  const RealizationSet data = load_or_generate(cli, cfg);
  const DataContext ctx(data);
  const Init init =
      random_init(ctx.M(), ctx.N(), cfg.solver.K, init_seed(cfg.solver.seed, 0),
                  ctx.mean_power());
  SolveOptions opt;
  opt.granularity =
      cli.substep_trace ? TraceGranularity::kSubstep : TraceGranularity::kOuter;
  opt.variant = cli.mu_verbatim ? MuVariant::kVerbatim : MuVariant::kObjectiveConsistent;
  const SolveResult result = tl ? tlnmf_solve(ctx, cfg.solver, init, opt)
                                : jdnmf_solve(ctx, cfg.solver, init, opt);
  write_solve_result_csv(cli.out_dir, result);
  std::printf("%s: final C=%s L=%s I=%s -> %s\n", tl ? "tlnmf" : "jdnmf",
              format_double(result.trace.back().C).c_str(),
              format_double(result.trace.back().L).c_str(),
              format_double(result.trace.back().I).c_str(), cli.out_dir.c_str());
  return 0;
}

int run_gap_cmd(const CliOptions& cli) {
  const FullConfig cfg = load_config(cli);
  const GapExperiment gap =
      run_gap(dataset_spec(cli, cfg), parse_int_list(cli.s_grid), cfg.solver, cli.threads);
  write_gap_csv(cli.out_dir, gap);
  std::printf("gap: %zu rows, slope(I*)=%s slope(gap)=%s -> %s\n", gap.rows.size(),
              format_double(gap.slope_I_star).c_str(),
              format_double(gap.slope_gap).c_str(), cli.out_dir.c_str());
  return 0;
}

int run_atoms_cmd(const CliOptions& cli) {
  CliOptions notes_cli = cli;
  notes_cli.dataset = "notes";
  const FullConfig cfg = load_config(notes_cli);
  const AtomsExperiment atoms = run_atoms(cfg.notes, cfg.solver, cli.threads);
  write_atoms_csv(cli.out_dir, atoms);
  std::printf("atoms: top-%zu atoms per solver -> %s\n", atoms.tlnmf.fits.size(),
              cli.out_dir.c_str());
  return 0;
}

int run_complexity_cmd(const CliOptions& cli) {
  const FullConfig cfg = load_config(cli);
  std::vector<int> grid;
  if (cli.j_grid.empty())
    for (int j = 0; j <= cli.J_max; ++j) grid.push_back(j);
  else
    grid = parse_int_list(cli.j_grid);
  const auto rows = run_complexity(dataset_spec(cli, cfg), cfg.solver, grid);
  write_complexity_csv(cli.out_dir, rows);
  std::printf("complexity: %zu budget points -> %s\n", rows.size(), cli.out_dir.c_str());
  return 0;
}

int run_rate_cmd(const CliOptions& cli) {
  const FullConfig cfg = load_config(cli);
  const RateExperiment rate =
      run_rate(cfg.gcm, parse_int_list(cli.s_grid), cli.trials, 1e-12, 3.0, cli.threads);
  write_rate_csv(cli.out_dir, rate);
  std::printf("rate: %zu grid points x %d trials -> %s\n", rate.rows.size(), cli.trials,
              cli.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transform-learning NMF and JD+NMF experiment harness"};
  app.require_subcommand(1);

  CliOptions cli;
  const auto add_common = [&](CLI::App* cmd, bool with_dataset = true) {
    if (with_dataset)
      cmd->add_option("--dataset", cli.dataset, "gcm or notes")
          ->check(CLI::IsMember({"gcm", "notes"}));
    cmd->add_option("--config", cli.config_file, "flat key=value config file");
    cmd->add_option("--out", cli.out_dir, "output directory");
    cmd->add_option("--seed", cli.seed, "RNG seed (overrides config)");
    cmd->add_option("--threads", cli.threads, "worker threads for independent runs");
    cmd->add_option("-S,--realizations", cli.S, "number of realizations S");
  };

  CLI::App* gen = app.add_subcommand("gen", "generate a dataset bundle (CSV)");
  add_common(gen);

  CLI::App* tl = app.add_subcommand("tlnmf", "run the TL-NMF solver once");
  add_common(tl);
  tl->add_option("--data", cli.data_dir, "read realizations from a bundle directory");
  tl->add_flag("--substep-trace", cli.substep_trace, "record every MU sweep and QN step");
  tl->add_flag("--mu-verbatim", cli.mu_verbatim,
               "multiplicative updates fit V instead of V + eps0");

  CLI::App* jd = app.add_subcommand("jdnmf", "run the JD+NMF solver once");
  add_common(jd);
  jd->add_option("--data", cli.data_dir, "read realizations from a bundle directory");
  jd->add_flag("--substep-trace", cli.substep_trace, "record every MU sweep and QN step");
  jd->add_flag("--mu-verbatim", cli.mu_verbatim,
               "multiplicative updates fit V instead of V + eps0");

  CLI::App* gap = app.add_subcommand("gap", "solution gap versus S (both solvers)");
  add_common(gap);
  gap->add_option("--s-grid", cli.s_grid, "comma-separated S values");

  CLI::App* atoms = app.add_subcommand("atoms", "top atoms + harmonic regression (notes)");
  add_common(atoms, false);

  CLI::App* cx = app.add_subcommand("complexity", "matched-budget C_S comparison");
  add_common(cx);
  cx->add_option("--j-grid", cli.j_grid, "comma-separated J values (default 0..J-max)");
  cx->add_option("--j-max", cli.J_max, "largest J when --j-grid is not given");

  CLI::App* rate = app.add_subcommand("rate", "Q_S(Phi_bar) decay versus S (GCM)");
  add_common(rate);
  rate->add_option("--s-grid", cli.s_grid, "comma-separated S values");
  rate->add_option("--trials", cli.trials, "independent trials per S");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return run_gen(cli);
    if (tl->parsed()) return run_solver(cli, true);
    if (jd->parsed()) return run_solver(cli, false);
    if (gap->parsed()) return run_gap_cmd(cli);
    if (atoms->parsed()) return run_atoms_cmd(cli);
    if (cx->parsed()) return run_complexity_cmd(cli);
    if (rate->parsed()) return run_rate_cmd(cli);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
