#include "cli/commands.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "cli/io.hpp"

namespace pqd::cli {

namespace {

struct SourceOptions {
  std::string model;
  std::string input;
  std::string spec;
  double omega = 1.0;
  double gamma = 1.0;
  double level_splitting = 0.0;
  double dt = 1e-3;
  double horizon = 1.0;
  std::string out;
};

void add_source_options(CLI::App& cmd, SourceOptions& o) {
  auto* model = cmd.add_option("--model", o.model, "Built-in model: jc | amplitude-damping | lindblad")
                    ->check(CLI::IsMember({"jc", "amplitude-damping", "lindblad"}));
  auto* input = cmd.add_option("--input", o.input, "Trajectory JSON file {dim, times, rho}");
  model->excludes(input);
  cmd.add_option("--spec", o.spec, "Lindblad spec JSON (with --model lindblad)");
  cmd.add_option("--omega", o.omega, "JC coupling strength")->capture_default_str();
  cmd.add_option("--gamma", o.gamma, "Amplitude-damping decay rate")->capture_default_str();
  cmd.add_option("--level-splitting", o.level_splitting, "Qubit splitting w in H = w sigma_z / 2")
      ->capture_default_str();
  cmd.add_option("--dt", o.dt, "Grid step")->capture_default_str();
  cmd.add_option("--horizon", o.horizon, "Final time")->capture_default_str();
  cmd.add_option("--out", o.out, "Output path prefix")->required();
}

std::vector<TrajectorySample> load_trajectory(const SourceOptions& o, const CLI::App& cmd) {
  if (!o.input.empty()) return read_trajectory_file(o.input);
  if (o.model.empty()) throw ValidationError("one of --model or --input is required");
  const auto grid = uniform_grid(o.dt, o.horizon);
  if (grid.size() < 2) throw ValidationError("the time grid needs at least two points (horizon >= dt)");
  if (o.model == "jc") {
    if (!(o.omega > 0.0)) throw ValidationError("--omega must be positive");
    return jc_trajectory(o.omega, grid);
  }
  if (o.model == "amplitude-damping") {
    if (!(o.gamma > 0.0)) throw ValidationError("--gamma must be positive");
    return amplitude_damping_trajectory(o.gamma, o.level_splitting, grid);
  }
  if (cmd.count("--spec") == 0) throw ValidationError("--model lindblad needs --spec <file>");
  const LindbladModelFile file = read_lindblad_file(o.spec);
  return integrate(file.spec, file.rho0, grid);
}

void write_file(const std::string& path, const auto& writer) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot write " + path);
  writer(os);
  if (!os) throw ValidationError("failed writing " + path);
}

int cmd_decompose(const SourceOptions& o, const CLI::App& cmd, bool strict, bool canonical,
                  std::ostream& out) {
  const auto samples = load_trajectory(o, cmd);
  DecompositionOptions opts;
  opts.strict_singular = strict;
  opts.gauge = canonical ? HamiltonianGauge::Canonical : HamiltonianGauge::ParallelTransport;
  const DecompositionSeries dec = decompose_trajectory(samples, opts);
  write_file(o.out + ".rates.csv", [&](std::ostream& os) { write_rate_report(os, dec); });
  write_file(o.out + ".hamiltonians.json", [&](std::ostream& os) { write_hamiltonians(os, dec); });
  write_file(o.out + ".flags.json", [&](std::ostream& os) { write_flags(os, dec); });
  std::size_t negative = 0, singular = 0;
  for (const auto& f : dec.flags) {
    negative += f.negative_rate;
    singular += f.singular;
  }
  out << "decomposed " << dec.size() << " samples (d=" << dec.dim() << "): " << negative
      << " with negative rates, " << singular << " singular\n";
  return kOk;
}

int cmd_simulate(SourceOptions o, const CLI::App& cmd, std::size_t trajectories, std::uint64_t seed,
                 unsigned threads, std::ostream& out, std::ostream& err) {
  const auto samples = load_trajectory(o, cmd);
  if (samples.size() < 2) throw ValidationError("trajectory needs at least two samples");
  if (!o.input.empty()) {
    if (cmd.count("--dt") == 0) o.dt = samples[1].time - samples[0].time;
    if (cmd.count("--horizon") == 0) o.horizon = samples.back().time - samples.front().time;
  }
  const DecompositionSeries dec = decompose_trajectory(samples);
  SimConfig config{o.dt, trajectories, seed, samples.front().time + o.horizon, threads};
  EnsembleResult result;
  try {
    result = run_ensemble(config, dec, samples.front().rho, samples);
  } catch (const RefusesToSimulate& e) {
    err << "error: " << e.what() << "\n";
    return kUnphysicalRates;
  } catch (const NegativeRate& e) {
    err << "error: " << e.what() << "\n";
    return kUnphysicalRates;
  } catch (const StepTooLarge& e) {
    err << "error: " << e.what() << "\n";
    return kUnphysicalRates;
  }
  write_file(o.out + ".ensemble.csv", [&](std::ostream& os) { write_ensemble(os, result); });
  out << "simulated " << trajectories << " trajectories over " << result.times.size() - 1
      << " steps; max trace distance to exact " << format_real(result.max_trace_distance()) << "\n";
  return kOk;
}

int cmd_channel(const std::string& in_path, const std::string& out_path, const std::string& prefix,
                std::ostream& out, std::ostream& err) {
  const DensityMatrix rho_in = read_matrix_file(in_path);
  const DensityMatrix rho_out = read_matrix_file(out_path);
  ChannelDecomposition dec;
  try {
    dec = decompose_channel(rho_in, rho_out);
  } catch (const SingularChannel& e) {
    err << "error: " << e.what() << "\nblock structure: " << e.block_structure().describe() << "\n";
    return kSingular;
  }
  std::optional<KrausLikeForm> kraus;
  if (dec.classification != ChannelClass::Singular) kraus = to_kraus_like(dec);
  write_file(prefix + ".channel.json",
             [&](std::ostream& os) { write_channel(os, dec, kraus ? &*kraus : nullptr); });
  if (dec.classification == ChannelClass::Singular) {
    err << "error: channel input spectrum is singular ("
        << (dec.block_structure ? dec.block_structure->describe() : std::string("singular"))
        << "); probabilities are not unique\n";
    return kSingular;
  }
  out << "classification: " << to_string(dec.classification) << "\nq:";
  for (Eigen::Index i = 0; i < dec.probabilities.size(); ++i) out << ' ' << format_real(dec.probabilities(i));
  out << "\n";
  return kOk;
}

int cmd_models(bool as_json, std::ostream& out) {
  const auto& models = model_catalogue();
  if (as_json) {
    out << "{\"models\": [";
    for (std::size_t m = 0; m < models.size(); ++m) {
      const auto& info = models[m];
      out << (m ? ",\n  " : "\n  ") << "{\"name\": \"" << info.name << "\", \"description\": \""
          << info.description << "\", \"lindblad_generated\": " << (info.lindblad_generated ? "true" : "false")
          << ", \"parameters\": [";
      for (std::size_t p = 0; p < info.parameters.size(); ++p) {
        const auto& par = info.parameters[p];
        out << (p ? ", " : "") << "{\"name\": \"" << par.name << "\", \"description\": \"" << par.description
            << "\", \"default\": " << format_real(par.default_value) << "}";
      }
      out << "]}";
    }
    out << "]}\n";
    return kOk;
  }
  for (const auto& info : model_catalogue()) {
    out << info.name << "\n  " << info.description << "\n";
    for (const auto& par : info.parameters) {
      out << "  --" << par.name << " (default " << format_real(par.default_value) << "): " << par.description
          << "\n";
    }
    if (info.name == "lindblad") out << "  --spec <file>: JSON with dim, hamiltonian, jump_ops, rho0\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probabilistic-unitary decomposition of open quantum system trajectories", "pqd"};
  app.require_subcommand(1);

  SourceOptions dec_opts;
  bool strict = false, canonical = false;
  auto* decompose = app.add_subcommand("decompose", "Rates, Hamiltonians and flags along a trajectory");
  add_source_options(*decompose, dec_opts);
  decompose->add_flag("--strict-singular", strict, "Fail (exit 3) on singular rate systems");
  decompose->add_flag("--unphased", canonical, "Skip the parallel-transport phase in H(t)");

  SourceOptions sim_opts;
  std::size_t trajectories = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo ensemble of the stochastic unitary scheme");
  add_source_options(*simulate, sim_opts);
  simulate->add_option("--trajectories", trajectories, "Ensemble size")->capture_default_str();
  simulate->add_option("--seed", seed, "RNG seed")->capture_default_str();
  simulate->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();

  std::string rho_in, rho_out, channel_prefix;
  auto* channel = app.add_subcommand("channel", "Decompose the map rho_in -> rho_out");
  channel->add_option("--rho-in", rho_in, "Input density matrix JSON")->required();
  channel->add_option("--rho-out", rho_out, "Output density matrix JSON")->required();
  channel->add_option("--out", channel_prefix, "Output path prefix")->required();

  bool as_json = false;
  auto* models = app.add_subcommand("models", "List the built-in models");
  models->add_flag("--json", as_json, "Machine-readable catalogue");

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("pqd");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (*decompose) return cmd_decompose(dec_opts, *decompose, strict, canonical, out);
    if (*simulate) return cmd_simulate(sim_opts, *simulate, trajectories, seed, threads, out, err);
    if (*channel) return cmd_channel(rho_in, rho_out, channel_prefix, out, err);
    if (*models) return cmd_models(as_json, out);
  } catch (const SingularSystem& e) {
    err << "error: " << e.what() << "\nblock structure: " << e.block_structure().describe() << "\n";
    return kSingular;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace pqd::cli
