// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

// scdec: speculative contrastive decoding engine CLI.
//
// Subcommands:
//   decode   generate text with expert/amateur/cd/sd/scd modes
//   verify   check sampler losslessness (exact enumeration or Monte Carlo)
//   sweep    expected-acceleration CSV over a cost-coefficient grid
//   entropy  accepted/rejected token-entropy report from a trace file
//   metrics  distinct-ngram diversity of a completion
//
// Exit codes: 0 success, 2 usage/config error, 3 internal invariant
// violation (a failed verification counts as one).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scd/analysis.hpp"
#include "scd/contrast.hpp"
#include "scd/decode.hpp"
#include "scd/errors.hpp"
#include "scd/model.hpp"
#include "scd/textmetrics.hpp"
#include "scd/trace_io.hpp"
#include "scd/verify.hpp"

namespace {

using nlohmann::ordered_json;

// --config support: a flat JSON object {"flag-name": value, ...} mirroring
// the long option names of the invoked subcommand. The file is expanded
// into argv tokens before parsing; flags given on the command line win
// over config values, config values win over environment defaults.
std::string config_scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

void expand_json_config(std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw scd::config_error("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw scd::config_error("config " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw scd::config_error("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + key;
    if (has_flag(args, flag) || has_flag(args, "--no-" + key)) continue;
    if (value.is_boolean()) {
      args.push_back(value.get<bool>() ? flag : "--no-" + key);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        args.push_back(flag);
        args.push_back(config_scalar(v));
      }
    } else {
      args.push_back(flag);
      args.push_back(config_scalar(value));
    }
  }
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw scd::config_error("cannot open output file: " + path);
  out << content;
}

// ---------------------------------------------------------------------------
// decode

struct DecodeArgs {
  std::string mode = "scd";
  std::string expert_path;
  std::string amateur_path;
  std::string prompt;
  std::string variant = "improved";
  int gamma = 4;
  double alpha = 0.5;
  double beta = 0.5;
  double tau = 1.0;
  int max_tokens = 64;
  std::uint64_t seed = 0;
  bool stop_on_eos = true;
  std::string trace_out;
};

int run_decode(const DecodeArgs& args, bool gamma_given) {
  scd::DecodeConfig cfg;
  cfg.mode = scd::decode_mode_from_string(args.mode);
  cfg.gamma = args.gamma;
  cfg.contrast.variant = scd::contrast_variant_from_string(args.variant);
  cfg.contrast.alpha = args.alpha;
  cfg.contrast.beta = args.beta;
  cfg.contrast.tau = args.tau;
  cfg.max_new_tokens = args.max_tokens;
  cfg.seed = args.seed;
  cfg.stop_on_eos = args.stop_on_eos;
  cfg.record_traces = false;  // streamed through the sink instead

  const bool speculative =
      cfg.mode == scd::DecodeMode::kSd || cfg.mode == scd::DecodeMode::kScd;
  if (gamma_given && !speculative) {
    std::cerr << "warning: --gamma only applies to sd/scd; ignored\n";
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw scd::config_error(e.what());
  }

  const bool needs_expert = cfg.mode != scd::DecodeMode::kAmateur;
  const bool needs_amateur = cfg.mode != scd::DecodeMode::kExpert;
  if (needs_expert && args.expert_path.empty()) {
    throw scd::config_error("mode " + args.mode + " needs --expert");
  }
  if (needs_amateur && args.amateur_path.empty()) {
    throw scd::config_error("mode " + args.mode + " needs --amateur");
  }

  std::shared_ptr<const scd::ModelSpec> expert_spec, amateur_spec;
  if (needs_expert) expert_spec = scd::load_model(args.expert_path);
  if (needs_amateur) amateur_spec = scd::load_model(args.amateur_path);
  const auto& vocab = needs_expert ? expert_spec->vocab() : amateur_spec->vocab();
  const auto prompt = scd::tokenize(vocab, args.prompt);

  std::optional<scd::ModelSession> expert, amateur;
  if (expert_spec) expert.emplace(expert_spec, prompt);
  if (amateur_spec) amateur.emplace(amateur_spec, prompt);

  std::ofstream trace_file;
  scd::TraceSink sink;
  if (!args.trace_out.empty()) {
    trace_file.open(args.trace_out, std::ios::binary);
    if (!trace_file) throw scd::config_error("cannot open trace file: " + args.trace_out);
    sink = [&trace_file](const scd::IterationTrace& trace) {
      trace_file << scd::trace_to_jsonl(trace) << '\n';
    };
  }

  const auto result = scd::decode(expert ? &*expert : nullptr,
                                  amateur ? &*amateur : nullptr, cfg, sink);

  std::string text;
  for (std::size_t i = 0; i < result.tokens.size(); ++i) {
    if (i > 0) text += ' ';
    text += vocab.token(result.tokens[i]);
  }
  std::cout << text << '\n';

  std::cerr << "emitted " << result.totals.emitted << " tokens in "
            << result.totals.iterations << " iterations; expert forwards "
            << result.totals.expert_forwards << ", amateur forwards "
            << result.totals.amateur_forwards;
  if (result.totals.accepts + result.totals.rejects > 0) {
    const double lambda =
        static_cast<double>(result.totals.accepts) /
        static_cast<double>(result.totals.accepts + result.totals.rejects);
    std::cerr << ", empirical lambda " << fmt6(lambda);
    // Side-by-side view at c = 0.05: measured forward counts vs the
    // i.i.d. acceptance model. Per-token acceptance is not i.i.d. in
    // real runs, so a gap between the two is informative, not a bug.
    const double c = 0.05;
    const double measured =
        static_cast<double>(result.totals.emitted) /
        (static_cast<double>(result.totals.expert_forwards) +
         c * static_cast<double>(result.totals.amateur_forwards));
    const double modeled =
        cfg.mode == scd::DecodeMode::kSd
            ? scd::expected_acceleration_sd(std::min(lambda, 0.999999), cfg.gamma, c)
            : scd::expected_acceleration_scd(std::min(lambda, 0.999999), cfg.gamma, c);
    std::cerr << "; acceleration at c=0.05: measured " << fmt6(measured)
              << " vs i.i.d. model " << fmt6(modeled);
  }
  std::cerr << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::string mode = "exact";
  int pairs = 1000;
  std::size_t vocab_min = 2;
  std::size_t vocab_max = 16;
  std::int64_t trials = 1000000;
  double tol = -1.0;  // mode-dependent default
  std::uint64_t seed = 0;
  bool break_residual = false;
};

int run_verify(const VerifyArgs& args) {
  if (args.mode == "exact") {
    const double tol = args.tol > 0 ? args.tol : 1e-12;
    const auto report = scd::verify_exact(args.pairs, args.vocab_min, args.vocab_max,
                                          args.seed, tol, args.break_residual);
    std::cout << "pairs " << report.pairs << ", max abs error "
              << fmt6(report.max_abs_error) << ", max TV distance "
              << fmt6(report.max_tv_distance) << ", tolerance " << fmt6(tol) << '\n';
    std::cout << (report.pass ? "PASS" : "FAIL") << '\n';
    if (!report.pass) throw scd::internal_error("emitted-token law deviates from the target");
    return 0;
  }
  if (args.mode == "mc") {
    const double tol = args.tol > 0 ? args.tol : 0.005;
    const auto report =
        scd::verify_monte_carlo(args.trials, args.seed, tol, args.break_residual);
    std::cout << "tokens " << report.tokens << ", TV distance "
              << fmt6(report.tv_distance) << ", tolerance " << fmt6(tol) << '\n';
    std::cout << (report.pass ? "PASS" : "FAIL") << '\n';
    if (!report.pass) throw scd::internal_error("emitted-token frequencies deviate from the target");
    return 0;
  }
  throw scd::config_error("verify mode must be 'exact' or 'mc'");
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::vector<double> lambdas;
  std::vector<std::string> trace_paths;
  int gamma = 4;
  double c_min = 0.01;
  double c_max = 0.3;
  double c_step = 0.01;
  std::string variant = "improved";
  double alpha = 0.5;
  double beta = 0.5;
  double tau = 1.0;
  std::string out;
  std::string estimate_expert;
  std::string estimate_amateur;
};

void estimate_cost_coefficient(const std::string& expert_path,
                               const std::string& amateur_path) {
  auto expert_spec = scd::load_model(expert_path);
  auto amateur_spec = scd::load_model(amateur_path);
  scd::ModelSession expert(expert_spec), amateur(amateur_spec);
  // Warm both up on a shared pseudo-context, then time forwards.
  auto time_forwards = [](scd::ModelSession& session) {
    const int steps = 20000;
    const auto vocab_size = static_cast<scd::TokenId>(session.vocab().size());
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < steps; ++i) {
      (void)session.logits_next();
      session.append(static_cast<scd::TokenId>(i % vocab_size));
    }
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(stop - start).count();
  };
  const double expert_time = time_forwards(expert);
  const double amateur_time = time_forwards(amateur);
  std::cerr << "estimated c = " << fmt6(amateur_time / expert_time)
            << " (wall-clock, HARDWARE-DEPENDENT; desk-scale backends do not "
               "approximate real serving costs; pass c explicitly)\n";
}

int run_sweep(const SweepArgs& args) {
  if (!args.estimate_expert.empty() || !args.estimate_amateur.empty()) {
    if (args.estimate_expert.empty() || args.estimate_amateur.empty()) {
      throw scd::config_error("--estimate-c-expert and --estimate-c-amateur go together");
    }
    estimate_cost_coefficient(args.estimate_expert, args.estimate_amateur);
  }

  if (args.lambdas.empty() && args.trace_paths.empty()) {
    throw scd::config_error("sweep needs --lambda values or --trace files");
  }
  if (!args.lambdas.empty() && !args.trace_paths.empty()) {
    throw scd::config_error("pass either --lambda or --trace, not both");
  }

  std::vector<double> lambdas = args.lambdas;
  for (const auto& path : args.trace_paths) {
    const auto traces = scd::read_traces(path);
    lambdas.push_back(scd::empirical_lambda(traces));
  }

  std::vector<double> grid;
  try {
    grid = scd::c_grid(args.c_min, args.c_max, args.c_step);
  } catch (const std::invalid_argument& e) {
    throw scd::config_error(e.what());
  }
  std::vector<scd::AccelerationPoint> rows;
  try {
    rows = scd::sweep_acceleration(lambdas, args.gamma, grid);
  } catch (const std::invalid_argument& e) {
    throw scd::config_error(e.what());
  }

  std::string csv = "variant,alpha,beta,tau,gamma,lambda,c,expected_tokens,factor_scd,factor_sd\n";
  for (const auto& row : rows) {
    csv += args.variant;
    csv += ',';
    csv += fmt6(args.alpha);
    csv += ',';
    csv += fmt6(args.beta);
    csv += ',';
    csv += fmt6(args.tau);
    csv += ',';
    csv += std::to_string(row.gamma);
    csv += ',';
    csv += fmt6(row.lambda);
    csv += ',';
    csv += fmt6(row.c);
    csv += ',';
    csv += fmt6(row.expected_tokens);
    csv += ',';
    csv += fmt6(row.factor_scd);
    csv += ',';
    csv += fmt6(row.factor_sd);
    csv += '\n';
  }
  if (args.out.empty()) {
    std::cout << csv;
  } else {
    write_text_file(args.out, csv);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// entropy

int run_entropy(const std::string& trace_path, const std::string& out_path) {
  const auto traces = scd::read_traces(trace_path);
  scd::EntropyReport report;
  try {
    report = scd::entropy_report(traces);
  } catch (const std::invalid_argument& e) {
    throw scd::config_error(e.what());
  }
  ordered_json doc;
  doc["unit"] = "nats";
  doc["groups"] = ordered_json::array();
  for (const auto& group : report.groups) {
    ordered_json g;
    g["model"] = group.model;
    g["tokens"] = group.status;
    g["mean"] = group.mean;
    g["stderr"] = group.stderr_mean;
    g["count"] = group.count;
    doc["groups"].push_back(std::move(g));
  }
  doc["note"] =
      "group means are reported for both directions of the accepted/rejected "
      "gap; no direction is asserted";
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// metrics

int run_metrics(const std::string& text, const std::string& tokens_file,
                const std::string& out_path) {
  if (text.empty() == tokens_file.empty()) {
    throw scd::config_error("pass exactly one of --text or --tokens-file");
  }
  std::string raw = text;
  if (!tokens_file.empty()) {
    std::ifstream in(tokens_file);
    if (!in) throw scd::config_error("cannot open tokens file: " + tokens_file);
    std::ostringstream buf;
    buf << in.rdbuf();
    raw = buf.str();
  }
  // Map token strings to ids by first occurrence; diversity only cares
  // about equality, not labels.
  std::vector<scd::TokenId> ids;
  std::map<std::string, scd::TokenId> seen;
  std::istringstream in(raw);
  std::string tok;
  while (in >> tok) {
    auto [it, inserted] = seen.emplace(tok, static_cast<scd::TokenId>(seen.size()));
    ids.push_back(it->second);
  }

  double value = 0.0;
  try {
    value = scd::diversity(ids);
  } catch (const std::invalid_argument& e) {
    throw scd::config_error(e.what());
  }
  const auto stats = scd::ngram_stats(ids);

  ordered_json doc;
  doc["tokens"] = ids.size();
  doc["ngrams"] = ordered_json::array();
  for (const auto& level : stats.levels) {
    ordered_json l;
    l["n"] = level.n;
    l["total"] = level.total;
    l["unique"] = level.unique;
    doc["ngrams"].push_back(std::move(l));
  }
  doc["diversity"] = value;
  const std::string out = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << out;
  } else {
    write_text_file(out_path, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speculative contrastive decoding engine"};
  app.name("scdec");
  app.require_subcommand(1);

  std::string config_path;  // consumed by expand_json_config before parsing

  DecodeArgs decode_args;
  auto* decode_cmd = app.add_subcommand("decode", "generate tokens and traces");
  decode_cmd->add_option("--config", config_path, "JSON config file mirroring the flag names");
  decode_cmd->add_option("--mode", decode_args.mode,
                         "expert | amateur | cd | sd | scd")
      ->default_val("scd");
  decode_cmd->add_option("--expert", decode_args.expert_path, "expert model spec JSON");
  decode_cmd->add_option("--amateur", decode_args.amateur_path, "amateur model spec JSON");
  decode_cmd->add_option("--prompt", decode_args.prompt, "space-separated prompt tokens");
  auto* gamma_opt =
      decode_cmd->add_option("--gamma", decode_args.gamma, "drafts per iteration (sd/scd)")
          ->default_val(4);
  decode_cmd->add_option("--variant", decode_args.variant, "original | improved")
      ->default_val("improved");
  decode_cmd->add_option("--alpha", decode_args.alpha, "plausibility cutoff in (0,1)")
      ->default_val(0.5);
  decode_cmd->add_option("--beta", decode_args.beta, "improved-variant contrast strength")
      ->default_val(0.5);
  decode_cmd->add_option("--tau", decode_args.tau, "target softmax temperature")
      ->default_val(1.0);
  decode_cmd->add_option("--max-tokens", decode_args.max_tokens, "tokens to generate")
      ->default_val(64);
  decode_cmd->add_option("--seed", decode_args.seed, "RNG seed")
      ->envname("SCD_SEED")
      ->default_val(0);
  decode_cmd->add_flag("--stop-on-eos,!--no-stop-on-eos", decode_args.stop_on_eos,
                       "stop at the vocabulary's EOS token (default on)");
  decode_cmd->add_option("--trace-out", decode_args.trace_out, "write JSONL iteration traces");

  VerifyArgs verify_args;
  auto* verify_cmd = app.add_subcommand("verify", "losslessness check of the sampler");
  verify_cmd->add_option("--config", config_path, "JSON config file mirroring the flag names");
  verify_cmd->add_option("--mode", verify_args.mode, "exact | mc")->default_val("exact");
  verify_cmd->add_option("--pairs", verify_args.pairs, "random pairs (exact mode)")
      ->default_val(1000);
  verify_cmd->add_option("--vocab-min", verify_args.vocab_min, "smallest vocabulary")
      ->default_val(2);
  verify_cmd->add_option("--vocab-max", verify_args.vocab_max,
                         "largest vocabulary (<= 16 for the exact enumerator)")
      ->default_val(16);
  verify_cmd->add_option("--trials", verify_args.trials, "emitted tokens (mc mode)")
      ->default_val(1000000);
  verify_cmd->add_option("--tol", verify_args.tol,
                         "pass tolerance (default 1e-12 exact, 0.005 mc)");
  verify_cmd->add_option("--seed", verify_args.seed, "RNG seed")
      ->envname("SCD_SEED")
      ->default_val(0);
  verify_cmd->add_flag("--break-residual", verify_args.break_residual,
                       "negative control: corrupt the resampling distribution");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "expected-acceleration CSV");
  sweep_cmd->add_option("--config", config_path, "JSON config file mirroring the flag names");
  sweep_cmd->add_option("--lambda", sweep_args.lambdas, "acceptance rate(s) in [0,1)");
  sweep_cmd->add_option("--trace", sweep_args.trace_paths,
                        "trace file(s); each contributes its empirical lambda");
  sweep_cmd->add_option("--gamma", sweep_args.gamma, "drafts per iteration")->default_val(4);
  sweep_cmd->add_option("--c-min", sweep_args.c_min, "cost grid start")->default_val(0.01);
  sweep_cmd->add_option("--c-max", sweep_args.c_max, "cost grid end")->default_val(0.3);
  sweep_cmd->add_option("--c-step", sweep_args.c_step, "cost grid step")->default_val(0.01);
  sweep_cmd->add_option("--variant", sweep_args.variant, "label echoed into the CSV")
      ->default_val("improved");
  sweep_cmd->add_option("--alpha", sweep_args.alpha, "label echoed into the CSV")
      ->default_val(0.5);
  sweep_cmd->add_option("--beta", sweep_args.beta, "label echoed into the CSV")
      ->default_val(0.5);
  sweep_cmd->add_option("--tau", sweep_args.tau, "label echoed into the CSV")
      ->default_val(1.0);
  sweep_cmd->add_option("--out", sweep_args.out, "CSV path (stdout when omitted)");
  sweep_cmd->add_option("--estimate-c-expert", sweep_args.estimate_expert,
                        "expert spec for a wall-clock c estimate (stderr only)");
  sweep_cmd->add_option("--estimate-c-amateur", sweep_args.estimate_amateur,
                        "amateur spec for a wall-clock c estimate (stderr only)");

  std::string entropy_trace, entropy_out;
  auto* entropy_cmd = app.add_subcommand("entropy", "token-entropy report from traces");
  entropy_cmd->add_option("--config", config_path, "JSON config file mirroring the flag names");
  entropy_cmd->add_option("--trace", entropy_trace, "JSONL trace file")->required();
  entropy_cmd->add_option("--out", entropy_out, "JSON report path (stdout when omitted)");

  std::string metrics_text, metrics_file, metrics_out;
  auto* metrics_cmd = app.add_subcommand("metrics", "diversity of a completion");
  metrics_cmd->add_option("--config", config_path, "JSON config file mirroring the flag names");
  metrics_cmd->add_option("--text", metrics_text, "space-separated completion tokens");
  metrics_cmd->add_option("--tokens-file", metrics_file, "file of whitespace tokens");
  metrics_cmd->add_option("--out", metrics_out, "JSON report path (stdout when omitted)");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    expand_json_config(args);
  } catch (const scd::config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::reverse(args.begin(), args.end());  // CLI11 vector parse takes reversed args
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (decode_cmd->parsed()) return run_decode(decode_args, gamma_opt->count() > 0);
    if (verify_cmd->parsed()) return run_verify(verify_args);
    if (sweep_cmd->parsed()) return run_sweep(sweep_args);
    if (entropy_cmd->parsed()) return run_entropy(entropy_trace, entropy_out);
    if (metrics_cmd->parsed()) return run_metrics(metrics_text, metrics_file, metrics_out);
  } catch (const scd::config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const scd::internal_error& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
