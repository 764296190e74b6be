// Copyright 2026 The qgt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// qgt command-line tool.
//
//   qgt run <experiment> [--config F] [--preset P] [--seed S] [--shots N|exact] [--out D]
//   qgt coordinator --config F [--port P] [--port-file F] [--out D]
//   qgt node --role A|B --port P [--fail-after N]
//   qgt calibrate-noise --param v|sigma --targets k=v,... [--out F]
//   qgt circuit (--chip a|b | --file F)
//
// Exit codes: 0 ok, 2 invalid input, 3 session aborted, 4 fit infeasible,
// 1 anything else.  Errors are printed to stderr as JSON.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "qgt/experiments.hpp"
#include "qgt/netlab/experiment.hpp"
#include "qgt/photonics.hpp"

#ifndef QGT_DATA_DIR
#define QGT_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace qgt;

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

int fail(const std::string& type, const std::string& message, int code) {
  std::cerr << json{{"error", {{"type", type}, {"message", message}, {"exit_code", code}}}}.dump() << std::endl;
  return code;
}

/// SHA-1 of "blob <size>\0<content>", as git hashes a file.
std::string git_blob_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1) throw std::runtime_error("SHA-1 failed");
  std::ostringstream hex;
  for (unsigned int k = 0; k < len; ++k) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[k]);
  return hex.str();
}

std::string data_dir() {
  const char* env = std::getenv("QGT_DATA_DIR");
  return env ? env : QGT_DATA_DIR;
}

/// A preset name resolves to <data>/presets/<name>.json; a path is used as is.
json load_preset(const std::string& name) {
  if (fs::exists(name)) return read_json_file(name);
  const auto path = fs::path(data_dir()) / "presets" / (name + ".json");
  if (!fs::exists(path)) throw UsageError("unknown preset '" + name + "' (looked for " + path.string() + ")");
  return read_json_file(path.string());
}

std::map<std::string, double> parse_pairs(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("expected name=value, got '" + item + "'");
    try {
      out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("bad number in '" + item + "'");
    }
  }
  return out;
}

void write_outputs(const fs::path& dir, const experiments::ExperimentResult& res) {
  fs::create_directories(dir);
  write_text_file((dir / "report.json").string(), res.report.dump(2) + "\n");
  for (const auto& a : res.files) {
    const auto p = dir / a.path;
    fs::create_directories(p.parent_path());
    write_text_file(p.string(), a.content);
  }
}

struct ConfigFlags {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string shots;
  std::string mode;
  std::optional<double> fiber_km;
  std::optional<std::uint64_t> trials;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "experiment config JSON");
    cmd->add_option("--preset", preset, "noise preset name or file");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--shots", shots, "kept coincidences per setting, or 'exact'");
    cmd->add_option("--mode", mode, "post_selected | corrected");
    cmd->add_option("--fiber-km", fiber_km, "fiber length");
    cmd->add_option("--trials", trials, "netlab trials");
  }

  /// Defaults, then the preset, then the config file, then flags.
  experiments::ExperimentConfig resolve(const std::string& experiment) const {
    experiments::ExperimentConfig cfg;
    json file = json::object();
    if (!config.empty()) file = read_json_file(config);
    const std::string preset_name = !preset.empty() ? preset : file.value("preset", std::string());
    if (!preset_name.empty()) experiments::apply_preset(cfg, load_preset(preset_name));
    file.erase("preset");
    cfg.merge_json(file);
    if (!experiment.empty()) cfg.experiment = experiment;
    if (seed) cfg.seed = *seed;
    if (!shots.empty()) cfg.shots = protocol::parse_shots(shots);
    if (!mode.empty()) cfg.mode = protocol::parse_mode(mode);
    if (fiber_km) cfg.noise.fiber_km = *fiber_km;
    if (trials) cfg.trials = *trials;
    cfg.validate();
    return cfg;
  }
};

int cmd_run(const std::string& experiment, const ConfigFlags& flags, std::string out) {
  const auto cfg = flags.resolve(experiment);
  if (out.empty()) out = "out/" + cfg.experiment;
  auto res = cfg.experiment == "netlab-session" ? netlab::run_netlab_experiment(cfg) : experiments::run_experiment(cfg);
  res.report["input_hash"] = git_blob_hash(cfg.to_json().dump());
  write_outputs(out, res);
  std::cout << res.report.at("metrics").dump() << std::endl;
  return 0;
}

int cmd_coordinator(const ConfigFlags& flags, const std::string& host, int port, const std::string& port_file, const std::string& out) {
  auto cfg = flags.resolve("netlab-session");
  auto s = netlab::session_config(cfg);
  fs::create_directories(out);
  s.log_path = (fs::path(out) / "messages.jsonl").string();
  netlab::Coordinator coordinator(s, netlab::Listener(host, port));
  if (!port_file.empty()) write_text_file(port_file, std::to_string(coordinator.port()) + "\n");
  log::info("coordinator listening on " + host + ":" + std::to_string(coordinator.port()));
  const auto res = coordinator.run();
  write_text_file((fs::path(out) / "outcomes.jsonl").string(), netlab::join_lines(res.outcome_lines));
  json manifest = res.manifest();
  manifest["input_hash"] = git_blob_hash(cfg.to_json().dump());
  manifest["audit"] = netlab::audit_json(netlab::audit_log(res.log));
  write_text_file((fs::path(out) / "manifest.json").string(), manifest.dump(2) + "\n");
  if (!res.ok()) return fail("session_aborted", res.reason, 3);
  return 0;
}

int cmd_node(const std::string& role, const std::string& host, int port, long fail_after, int latency_us) {
  netlab::NodeBehavior b;
  b.fail_after = fail_after;
  b.latency_us = latency_us;
  const auto summary = netlab::run_node(netlab::parse_role(role), host, port, b);
  std::cout << json{{"role", role}, {"completed_trials", summary.completed}, {"clean_shutdown", summary.clean_shutdown},
                    {"crashed", summary.crashed}, {"error", summary.error}}
                   .dump()
            << std::endl;
  if (summary.crashed) return 3;
  return summary.clean_shutdown ? 0 : fail("node_error", summary.error, 3);
}

struct CalibrateFlags {
  std::string name = "custom";
  std::string param = "source_visibility";
  std::vector<std::string> targets;
  std::vector<std::string> references;
  std::string base;
  std::optional<double> fiber_km;
  std::vector<double> drift;
  double tolerance = 0.02;
  std::uint64_t seed = 1;
  std::string source;
  std::string out;
};

int cmd_calibrate(const CalibrateFlags& f, const std::string& command_line) {
  channel::NoiseConfig base;
  if (!f.base.empty()) base = channel::noise_from_json(load_preset(f.base).at("noise"));
  if (f.fiber_km) base.fiber_km = *f.fiber_km;
  if (!f.drift.empty()) {
    if (f.drift.size() != 3) throw UsageError("--drift takes three angles");
    base.drift = {f.drift[0], f.drift[1], f.drift[2]};
  }
  const auto param = experiments::parse_fit_parameter(f.param);
  const auto targets = parse_pairs(f.targets);
  if (targets.empty()) throw UsageError("--targets is required");
  auto rng = experiments::stage_rng(f.seed, experiments::Stage::Compensator);
  const auto fit = experiments::calibrate_noise(base, param, targets, f.tolerance, rng);
  const json fit_json = experiments::to_json(fit, targets, f.tolerance);
  std::cout << fit_json.dump(2) << std::endl;
  if (!fit.feasible) return fail("infeasible", "no " + experiments::to_string(param) + " within tolerance of every target", 4);
  if (f.out.empty()) return 0;

  auto refs = parse_pairs(f.references);
  for (const auto& [k, v] : targets) refs.emplace(k, v);
  const fs::path out(f.out);
  const auto prov_name = out.stem().string() + ".provenance.json";
  const json preset = {{"name", f.name},
                       {"noise", channel::to_json(fit.noise)},
                       {"references", refs},
                       {"tolerance", f.tolerance},
                       {"fitted", {{"parameter", experiments::to_string(param)}, {"value", fit.value}}},
                       {"provenance", prov_name}};
  const json prov = {{"preset", f.name},
                     {"tool", "qgt"},
                     {"version", experiments::kVersion},
                     {"command", command_line},
                     {"reference_source", f.source},
                     {"base_noise", channel::to_json(base)},
                     {"fit", fit_json},
                     {"note", "Noise parameters are fitted to the reference values. Agreement with those values is a "
                              "calibration check, not an independent prediction."}};
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_text_file(out.string(), preset.dump(2) + "\n");
  write_text_file((out.parent_path() / prov_name).string(), prov.dump(2) + "\n");
  return 0;
}

int cmd_circuit(const std::string& chip, const std::string& file, const std::string& q1, const std::string& q4,
                const std::string& analyzer) {
  if (!file.empty()) {
    const auto c = photonics::circuit_from_json(read_json_file(file));
    std::cout << json{{"elements", c.size()}, {"unitary", matrix_to_json(photonics::circuit_unitary(c))}}.dump(2) << std::endl;
    return 0;
  }
  const auto prep = photonics::PreparationSettings::for_states(protocol::named_qubit(q1), protocol::named_qubit(q4));
  const Basis b = parse_basis(analyzer);
  if (chip == "a" || chip == "A") {
    std::cout << photonics::circuit_to_json(photonics::chip_a_circuit(prep, b)).dump(2) << std::endl;
  } else if (chip == "b" || chip == "B") {
    std::cout << photonics::circuit_to_json(photonics::chip_b_circuit(prep, b)).dump(2) << std::endl;
  } else {
    throw UsageError("give --chip a|b or --file");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chip-to-chip CNOT gate teleportation simulator"};
  app.set_version_flag("--version", experiments::kVersion);
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one experiment and write report.json, matrices/*.csv, counts.jsonl");
  std::string experiment, out;
  ConfigFlags run_flags;
  run->add_option("experiment", experiment, "experiment name")->required();
  run->add_option("--out", out, "output directory (default out/<experiment>)");
  run_flags.attach(run);

  auto* coord = app.add_subcommand("coordinator", "serve one netlab session to two nodes");
  ConfigFlags coord_flags;
  std::string host = "127.0.0.1", port_file, coord_out = "out/netlab-coordinator";
  int port = 0;
  coord_flags.attach(coord);
  coord->add_option("--host", host, "listen address");
  coord->add_option("--port", port, "listen port (0 picks one)");
  coord->add_option("--port-file", port_file, "write the bound port here");
  coord->add_option("--out", coord_out, "output directory");

  auto* node = app.add_subcommand("node", "run node A or B of a netlab session");
  std::string role;
  std::string node_host = "127.0.0.1";
  int node_port = 0;
  long fail_after = -1;
  int latency_us = 0;
  node->add_option("--role", role, "A or B")->required();
  node->add_option("--host", node_host, "coordinator address");
  node->add_option("--port", node_port, "coordinator port")->required();
  node->add_option("--fail-after", fail_after, "drop the connection after N completed trials");
  node->add_option("--latency-us", latency_us, "delay before every send");

  auto* cal = app.add_subcommand("calibrate-noise", "fit a noise parameter to target fidelities and write a preset");
  CalibrateFlags cf;
  cal->add_option("--name", cf.name, "preset name");
  cal->add_option("--param", cf.param, "source_visibility | phase_jitter_sigma");
  cal->add_option("--targets", cf.targets, "metric=value pairs to fit")->delimiter(',');
  cal->add_option("--references", cf.references, "extra metric=value pairs stored as references")->delimiter(',');
  cal->add_option("--base", cf.base, "preset whose noise is the starting point");
  cal->add_option("--fiber-km", cf.fiber_km, "fiber length");
  cal->add_option("--drift", cf.drift, "drift Euler angles alpha,beta,gamma")->delimiter(',');
  cal->add_option("--tolerance", cf.tolerance, "feasibility tolerance");
  cal->add_option("--seed", cf.seed, "compensator calibration seed");
  cal->add_option("--source", cf.source, "where the reference values come from");
  cal->add_option("--out", cf.out, "preset file to write");

  auto* circ = app.add_subcommand("circuit", "emit a chip circuit description or evaluate one");
  std::string chip, circ_file, q1 = "+", q4 = "0", analyzer = "Z";
  circ->add_option("--chip", chip, "a or b");
  circ->add_option("--file", circ_file, "circuit description to evaluate");
  circ->add_option("--q1", q1, "qubit-1 preparation");
  circ->add_option("--q4", q4, "qubit-4 preparation");
  circ->add_option("--analyzer", analyzer, "analyzer basis Z|X|Y");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", e.what(), 2);
  }

  std::string command_line = "qgt";
  for (int k = 1; k < argc; ++k) command_line += std::string(" ") + argv[k];

  try {
    if (*run) return cmd_run(experiment, run_flags, out);
    if (*coord) return cmd_coordinator(coord_flags, host, port, port_file, coord_out);
    if (*node) return cmd_node(role, node_host, node_port, fail_after, latency_us);
    if (*cal) return cmd_calibrate(cf, command_line);
    if (*circ) return cmd_circuit(chip, circ_file, q1, q4, analyzer);
  } catch (const netlab::ProtocolError& e) {
    return fail("protocol_" + e.code(), e.what(), 3);
  } catch (const std::invalid_argument& e) {
    return fail("invalid_config", e.what(), 2);
  } catch (const std::out_of_range& e) {
    return fail("invalid_config", e.what(), 2);
  } catch (const json::exception& e) {
    return fail("invalid_config", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 1);
  }
  return 1;
}
