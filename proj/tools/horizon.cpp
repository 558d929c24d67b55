// horizon: validate knowledge bases, run scripted fusion pipelines, time the
// synthetic workload and serve the HTTP API.
//
// Exit codes: 0 ok, 1 domain error, 2 I/O or usage error.

#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "horizon/bench.hpp"
#include "horizon/engine.hpp"
#include "horizon/kb_store.hpp"
#include "horizon/service.hpp"

namespace {

using namespace horizon;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitIo = 2;

int exit_code_for(const Error& e) { return e.code() == ErrorCode::io_error ? kExitIo : kExitDomain; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixed4(double v) {
  char buf[32];
  // Values that round to zero print without a sign.
  std::snprintf(buf, sizeof buf, "%.4f", std::abs(v) < 5e-5 ? 0.0 : v);
  return buf;
}

// ---- validate ----

int run_validate(const std::string& kb_path) {
  KnowledgeBase kb = load_kb_file(kb_path);
  std::size_t relations = kb.gallery.relations().size();
  std::cout << "ok: " << kb_path << ": " << kb.gallery.frame_count() << " frames, " << relations << " relations, "
            << kb.static_boes.size() << " static BOEs\n";
  return kExitOk;
}

// ---- fuse ----

struct FuseOptions {
  std::string kb_path;
  std::string script_path;
  std::string rule = "dempster";
  std::string auto_discount = "on";
  std::string target;
  bool explain = false;
  bool json = false;
};

// Nodes no other node consumes, in creation order, skipping disabled ones.
std::vector<NodeId> frontier(const Session& s) {
  std::set<NodeId> consumed;
  for (const auto* n : s.nodes())
    for (const auto& in : n->inputs) consumed.insert(in);
  std::vector<NodeId> out;
  for (const auto* n : s.nodes())
    if (!n->disabled && !consumed.count(n->id)) out.push_back(n->id);
  return out;
}

void print_table(const ConclusionReport& rep) {
  std::size_t width = 9;
  for (const auto& r : rep.rows) width = std::max(width, r.label.size());
  char line[512];
  std::snprintf(line, sizeof line, "%-*s  %8s  %11s  %8s\n", static_cast<int>(width), "statement", "support",
                "uncertainty", "against");
  std::cout << line;
  for (const auto& r : rep.rows) {
    // Θ is two bytes in UTF-8 but one column wide.
    const int pad = static_cast<int>(width) + (r.label == "Θ" ? 1 : 0);
    std::snprintf(line, sizeof line, "%-*s  %8s  %11s  %8s\n", pad, r.label.c_str(), fixed4(r.support).c_str(),
                  fixed4(r.uncertainty).c_str(), fixed4(r.against).c_str());
    std::cout << line;
  }
  std::cout << "conflict: " << fixed4(rep.conflict) << "\n";
  std::cout << "unknown: " << fixed4(rep.unknown_mass) << "\n";
  std::cout << "translation loss: " << fixed4(rep.translation_loss) << "\n";
  std::cout << "inconclusive: " << (rep.inconclusive ? "yes" : "no") << "\n";
}

void print_influence(const InfluenceReport& rep, const std::map<std::string, std::string>& names) {
  std::cout << "\ninfluence (" << (rep.method == InfluenceMethod::standalone ? "standalone" : "leave-one-out")
            << (rep.exact ? "" : ", restricted lattice") << ")\n";
  char line[512];
  for (std::size_t i = 0; i < rep.entries.size(); ++i) {
    const auto& e = rep.entries[i];
    auto it = names.find(e.boe_id);
    const std::string name = it == names.end() ? std::string() : it->second;
    std::snprintf(line, sizeof line, "%2zu. %-6s %-24s %10s bits  %6.1f%%\n", i + 1, e.boe_id.c_str(), name.c_str(),
                  fixed4(e.influence).c_str(), e.share * 100.0 + 0.0);
    std::cout << line;
  }
  std::cout << explanation_text(rep, names) << "\n";
}

int run_fuse(const FuseOptions& o) {
  if (o.auto_discount != "on" && o.auto_discount != "off")
    fail(ErrorCode::invalid_argument, "--auto-discount must be 'on' or 'off'");
  const FusionRule rule = parse_fusion_rule(o.rule);
  KnowledgeBase kb = load_kb_file(o.kb_path);
  const Json script = parse_json(read_file(o.script_path));
  if (!script.is_array()) fail(ErrorCode::validation_error, "script must be a JSON list of operation records");

  AutoDiscountConfig cfg;
  cfg.enabled = o.auto_discount == "on";
  Session session(std::move(kb), cfg);
  for (const auto& rec : script) session.apply(rec);

  const auto front = frontier(session);
  if (front.empty()) fail(ErrorCode::insufficient_inputs, "the script produced no BOEs to report on");
  NodeId result;
  if (front.size() == 1) {
    result = front.front();
  } else {
    const std::string target = o.target.empty() ? session.node(front.front()).boe.frame().id() : o.target;
    result = session.run_fusion(front, rule, target, cfg.enabled);
  }

  const LineageNode& node = session.node(result);
  const ConclusionReport rep = session.conclusion_of(result);
  const bool fused = std::holds_alternative<op::Fused>(node.op);
  const auto names = session.source_names();

  if (o.json) {
    Json out{{"node", api_node(node)}, {"conclusion", api_conclusion(rep, node.boe.frame())}};
    if (o.explain && fused) out["explanation"] = api_influence(session.explanation_of(result), names);
    std::cout << to_canonical(out);
    return kExitOk;
  }

  std::cout << "conclusion " << result << " on frame " << node.boe.frame().id();
  if (const auto* f = std::get_if<op::Fused>(&node.op))
    std::cout << " (rule " << to_string(f->rule) << ", auto-discount " << (f->auto_discount ? "on" : "off") << ")";
  std::cout << "\n";
  print_table(rep);
  if (o.explain && fused) print_influence(session.explanation_of(result), names);
  return kExitOk;
}

// ---- bench ----

std::vector<std::size_t> parse_sizes(const std::string& text, std::size_t expect, const char* what) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(item.c_str(), &end, 10);
    if (item.empty() || *end != '\0') fail(ErrorCode::invalid_argument, std::string("bad ") + what + ": '" + text + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty() || (expect && out.size() != expect))
    fail(ErrorCode::invalid_argument, std::string("bad ") + what + ": '" + text + "'");
  return out;
}

int run_bench(std::size_t boes, const std::string& frames, const std::string& ops, std::uint64_t seed) {
  bench::WorkloadSpec spec;
  spec.boes = boes;
  spec.frame_sizes = parse_sizes(frames, 0, "--frames");
  for (auto n : spec.frame_sizes)
    if (n == 0) fail(ErrorCode::invalid_argument, "frame sizes must be positive");
  const auto counts = parse_sizes(ops, 3, "--ops");
  spec.discounts = counts[0];
  spec.translations = counts[1];
  spec.fusions = counts[2];
  spec.seed = seed;

  const bench::Workload w = bench::generate(spec);
  const bench::BenchResult r = bench::run(w);
  char line[256];
  std::snprintf(line, sizeof line,
                "workload: %zu BOEs on %zu frames (mean frame size %.1f), %zu discounts, %zu translations, "
                "%zu fusions, seed %llu\n",
                spec.boes, spec.frame_sizes.size(), r.mean_frame_size, w.discounts.size(), w.translations.size(),
                w.fusions.size(), static_cast<unsigned long long>(seed));
  std::cout << line;
  std::snprintf(line, sizeof line, "workload digest: %016llx\n", static_cast<unsigned long long>(r.workload_digest));
  std::cout << line;
  std::snprintf(line, sizeof line, "result digest: %016llx\n", static_cast<unsigned long long>(r.result_digest));
  std::cout << line;
  std::snprintf(line, sizeof line, "discount: %.3f ms\ntranslate: %.3f ms\nfuse: %.3f ms\ntotal: %.3f ms\n",
                r.times.discount_ms, r.times.translate_ms, r.times.fuse_ms, r.times.total_ms());
  std::cout << line;
  std::cout << "total-conflict fallbacks: " << r.total_conflicts << "\n";
  std::cout << "largest fused BOE: " << r.max_fused_focal << " focal sets\n";
  return kExitOk;
}

// ---- serve ----

int run_serve(const std::string& kb_path, const std::string& host, int port) {
  KnowledgeBase kb = load_kb_file(kb_path);

  // Signals go to a dedicated thread so the stop request runs outside a handler.
  sigset_t sigs;
  sigemptyset(&sigs);
  sigaddset(&sigs, SIGINT);
  sigaddset(&sigs, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &sigs, nullptr);

  Service service{Session(std::move(kb))};
  httplib::Server server;
  // The library default adds SO_REUSEPORT, which would let a second server
  // share the port silently.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  service.mount(server);

  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port(host);
  } else if (!server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) {
    std::cerr << "horizon serve: cannot bind " << host << ":" << port << ": address already in use\n";
    return kExitIo;
  }
  std::cout << "listening on http://" << host << ":" << bound << std::endl;

  std::thread watcher([&] {
    int sig = 0;
    sigwait(&sigs, &sig);
    server.stop();
  });
  server.listen_after_bind();
  // listen_after_bind only returns after stop(), so the watcher has finished or is about to.
  watcher.join();
  std::cout << "shut down" << std::endl;
  return kExitOk;
}

int default_port() {
  if (const char* env = std::getenv("HORIZON_PORT")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*env && *end == '\0' && v >= 0 && v <= 65535) return static_cast<int>(v);
  }
  return 8080;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evidential reasoning engine for multi-source target classification"};
  app.require_subcommand(1);

  std::string validate_kb;
  auto* validate = app.add_subcommand("validate", "Check a knowledge base file");
  validate->add_option("kb", validate_kb, "Knowledge base (*.horizon.json)")->required();

  FuseOptions fo;
  auto* fuse_cmd = app.add_subcommand("fuse", "Run a scripted pipeline and print the conclusion");
  fuse_cmd->add_option("kb", fo.kb_path, "Knowledge base (*.horizon.json)")->required();
  fuse_cmd->add_option("script", fo.script_path, "JSON list of operation records")->required();
  fuse_cmd->add_option("--rule", fo.rule, "dempster | smets | dependent")->capture_default_str();
  fuse_cmd->add_option("--auto-discount", fo.auto_discount, "on | off")->capture_default_str();
  fuse_cmd->add_option("--target", fo.target, "Frame to fuse on (default: frame of the first input)");
  fuse_cmd->add_flag("--explain", fo.explain, "Also print the influence ranking");
  fuse_cmd->add_flag("--json", fo.json, "Full-precision JSON output");

  std::size_t bench_boes = 35;
  std::string bench_frames = "211,180,240,8,352,120,280,300";
  std::string bench_ops = "25,29,35";
  std::uint64_t bench_seed = 1997;
  auto* bench_cmd = app.add_subcommand("bench", "Time the seeded synthetic workload");
  bench_cmd->add_option("--boes", bench_boes, "Number of BOEs")->capture_default_str();
  bench_cmd->add_option("--frames", bench_frames, "Comma-separated frame sizes")->capture_default_str();
  bench_cmd->add_option("--ops", bench_ops, "discounts,translations,fusions")->capture_default_str();
  bench_cmd->add_option("--seed", bench_seed, "Generator seed")->capture_default_str();

  std::string serve_kb;
  std::string serve_host = "127.0.0.1";
  int serve_port = default_port();
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API for one session");
  serve->add_option("--kb", serve_kb, "Knowledge base (*.horizon.json)")->required();
  serve->add_option("--port", serve_port, "TCP port, 0 for any (default $HORIZON_PORT or 8080)");
  serve->add_option("--host", serve_host, "Bind address")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitIo;
  }

  try {
    if (*validate) return run_validate(validate_kb);
    if (*fuse_cmd) return run_fuse(fo);
    if (*bench_cmd) return run_bench(bench_boes, bench_frames, bench_ops, bench_seed);
    if (*serve) return run_serve(serve_kb, serve_host, serve_port);
  } catch (const Error& e) {
    std::cerr << "horizon: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "horizon: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitIo;
}
