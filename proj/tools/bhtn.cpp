// bhtn: command-line front end for Boolean hierarchical Tucker networks.
//
// Exit codes: 0 success, 1 usage error, 2 unreadable or malformed input,
// 3 solver failure, 4 any other runtime error.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>
#include <unistd.h>

#include "CLI11.hpp"
#include "bhtn/bhtn.hpp"

namespace {

using namespace bhtn;

enum ExitCode { kOk = 0, kUsage = 1, kParse = 2, kSolver = 3, kRuntime = 4 };

struct SolverFlags {
  std::string backend = "sa";
  std::size_t reads = 100;
  std::size_t sweeps = 1000;
  double beta_min = 0.1;
  double beta_max = 10.0;
  std::optional<double> time_limit_ms;
  std::string endpoint;
  std::size_t max_iters = 20;
  std::size_t stall = 3;
  std::string init = "column";
  std::uint64_t seed = 0;
  std::size_t jobs = default_jobs();
  int verbose = 0;

  void attach(CLI::App* app, bool with_bmf = true) {
    app->add_option("--backend", backend, "Column solver: exact | sa | remote")
        ->check(CLI::IsMember({"exact", "sa", "remote"}))
        ->capture_default_str();
    app->add_option("--reads", reads, "Anneals per column solve")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--sweeps", sweeps, "Sweeps per anneal")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--beta-min", beta_min, "Initial inverse temperature")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--beta-max", beta_max, "Final inverse temperature")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--time-limit", time_limit_ms, "Per-solve sampling time limit in ms");
    app->add_option("--endpoint", endpoint, "Remote solver base URL")->envname("BHTN_REMOTE_ENDPOINT");
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
    app->add_option("--jobs", jobs, "Worker threads (1 = serial reference)")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_flag("-v,--verbose", verbose, "More diagnostics on stderr");
    if (with_bmf) {
      app->add_option("--max-iters", max_iters, "Alternating iterations per factorization")->check(CLI::PositiveNumber)->capture_default_str();
      app->add_option("--stall", stall, "Stop after this many iterations without improvement")->capture_default_str();
      app->add_option("--init", init, "Factor initialization: column | random")
          ->check(CLI::IsMember({"column", "random"}))
          ->capture_default_str();
    }
  }

  SolverConfig solver() const {
    SolverConfig c;
    c.backend = parse_backend(backend);
    c.num_reads = reads;
    c.sweeps = sweeps;
    c.beta_range = {beta_min, beta_max};
    if (time_limit_ms) c.time_limit = Millis(*time_limit_ms);
    if (!endpoint.empty()) c.remote_endpoint = endpoint;
    c.validate();
    return c;
  }

  BmfConfig bmf(std::size_t rank) const {
    BmfConfig c;
    c.rank = rank;
    c.max_iters = max_iters;
    c.stall_patience = stall;
    c.init = init == "random" ? InitMethod::random_bernoulli : InitMethod::column_sample;
    c.solver = solver();
    c.seed = seed;
    c.jobs = jobs;
    c.validate();
    return c;
  }
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
  } else {
    write_file(path, content);
  }
}

json load_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string format_tensor(const BitTensor& t, const std::string& format) {
  return format == "text" ? tensor_to_text(t) : tensor_to_json(t).dump() + "\n";
}

std::map<ModeRange, std::size_t> parse_edge_ranks(const std::vector<std::string>& specs) {
  static const std::regex re(R"(^(\d+)-(\d+)=(\d+)$)");
  std::map<ModeRange, std::size_t> out;
  for (const auto& s : specs) {
    std::smatch m;
    if (!std::regex_match(s, m, re) || std::stoul(m[3]) == 0) {
      throw UsageError("--edge-rank expects FIRST-LAST=RANK with RANK >= 1, got '" + s + "'");
    }
    out[{std::stoul(m[1]), std::stoul(m[2])}] = std::stoul(m[3]);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct GenerateCmd {
  std::size_t order = 4, size = 4, rank = 2;
  std::optional<double> p;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out, tree_out, format = "json";

  void attach(CLI::App* app) {
    app->add_option("--order", order, "Tensor order")->check(CLI::Range(2, 64))->capture_default_str();
    app->add_option("--size", size, "Size of every mode")->check(CLI::Range(2, 1 << 20))->capture_default_str();
    app->add_option("--rank", rank, "Edge rank of the generating network")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--p", p, "Bernoulli density of the factors (default: drawn from 0.1..0.9)")->check(CLI::Range(0.0, 1.0));
    app->add_option("--noise", noise, "Bit-flip probability applied to the written tensor")->check(CLI::Range(0.0, 0.999999))->capture_default_str();
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
    app->add_option("-o,--out", out, "Tensor output path (default stdout)");
    app->add_option("--tree", tree_out, "Ground-truth network output path");
    app->add_option("--format", format, "Tensor format: json | text")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
  }

  int run() const {
    GenSpec spec{order, size, rank, p, noise, seed};
    const GeneratedProblem g = generate(spec);
    const BitTensor t = noise > 0.0 ? add_noise(g.tensor, noise, derive_seed(seed, {0x9015e})) : g.tensor;
    emit(out, format_tensor(t, format));
    if (!tree_out.empty()) write_file(tree_out, tree_to_json(g.ground_truth).dump() + "\n");
    std::cerr << "generated " << shape_string(t.shape()) << " tensor, p=" << g.p << ", density "
              << static_cast<double>(t.data().popcount()) / static_cast<double>(t.size())
              << (noise > 0.0 ? ", noisy" : "") << "\n";
    return kOk;
  }
};

struct DecomposeCmd {
  std::string input, out, report;
  std::size_t rank = 2;
  std::vector<std::string> edge_ranks;
  SolverFlags flags;

  void attach(CLI::App* app) {
    app->add_option("input", input, "Tensor file (JSON or plain text)")->required();
    app->add_option("--rank", rank, "Uniform edge rank")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--edge-rank", edge_ranks, "Per-edge override FIRST-LAST=RANK (modes 0-based)");
    app->add_option("-o,--out", out, "Network JSON output path (default stdout)");
    app->add_option("--report", report, "Write the run report as JSON to this path");
    flags.attach(app);
  }

  int run() const {
    const BitTensor t = parse_tensor(read_file(input));
    HtnConfig cfg;
    cfg.rank = rank;
    cfg.rank_overrides = parse_edge_ranks(edge_ranks);
    cfg.bmf = flags.bmf(rank);
    cfg.seed = flags.seed;
    const Decomposition dec = decompose(t, cfg);
    const BitTensor rec = reconstruct(dec.tree);
    const double err = error_rate(t, rec);

    emit(out, tree_to_json(dec.tree).dump() + "\n");
    for (const auto& w : dec.stats.warnings) std::cerr << "warning: " << w << "\n";
    std::cerr << "shape " << shape_string(t.shape()) << "  rank " << rank << "  backend "
              << flags.backend << "\n"
              << "error rate " << err << " (" << hamming(t, rec) << " of " << t.size() << ")\n"
              << "factorizations " << dec.stats.factorizations << ", iterations " << dec.stats.iters
              << ", reads " << dec.stats.reads << "\n"
              << "solver " << dec.stats.solver_time.count() << " ms, total "
              << dec.stats.total_time.count() << " ms\n";
    if (!report.empty()) {
      json r = {{"error_rate", err},
                {"mismatches", hamming(t, rec)},
                {"elements", t.size()},
                {"factorizations", dec.stats.factorizations},
                {"iters", dec.stats.iters},
                {"reads", dec.stats.reads},
                {"solver_ms", dec.stats.solver_time.count()},
                {"total_ms", dec.stats.total_time.count()},
                {"warnings", dec.stats.warnings}};
      write_file(report, r.dump(2) + "\n");
    }
    return kOk;
  }
};

struct ReconstructCmd {
  std::string input, out, format = "json", compare;

  void attach(CLI::App* app) {
    app->add_option("input", input, "Network JSON file")->required();
    app->add_option("-o,--out", out, "Tensor output path (default stdout)");
    app->add_option("--format", format, "Tensor format: json | text")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
    app->add_option("--compare", compare, "Report the error rate against this tensor file");
  }

  int run() const {
    const HtnTree tree = tree_from_json(load_json(input));
    const BitTensor t = reconstruct(tree);
    emit(out, format_tensor(t, format));
    if (!compare.empty()) {
      const BitTensor ref = parse_tensor(read_file(compare));
      if (ref.shape() != t.shape()) throw ParseError("--compare tensor has a different shape");
      std::cerr << "error rate " << error_rate(ref, t) << "\n";
    }
    return kOk;
  }
};

struct BmfCmd {
  std::string input, out;
  std::size_t rank = 2;
  SolverFlags flags;

  void attach(CLI::App* app) {
    app->add_option("input", input, "Matrix file (JSON with 2-entry shape, or plain text)")->required();
    app->add_option("--rank", rank, "Factorization rank")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("-o,--out", out, "Factor JSON output path (default stdout)");
    flags.attach(app);
  }

  int run() const {
    const BitTensor t = parse_tensor(read_file(input));
    if (t.order() != 2) throw ParseError("bmf expects a matrix (2-entry shape)");
    const BitMatrix x = to_matrix(t, t.shape()[0]);
    const BmfResult r = factorize(x, flags.bmf(rank));
    json j = {{"a", matrix_to_json(r.a)},
              {"b", matrix_to_json(r.b)},
              {"distance", r.distance},
              {"iters", r.iters},
              {"history", r.history},
              {"solver_ms", r.solver_time.count()}};
    emit(out, j.dump() + "\n");
    std::cerr << "distance " << r.distance << " of " << x.size() << " after " << r.iters
              << " iterations\n";
    return kOk;
  }
};

struct BenchCmd {
  std::string vary = "rank", values_str = "2,3,4", noise = "both", out, plot;
  std::size_t order = 4, size = 8, rank = 4, trials = 10;
  double noise_prob = 0.01;
  SolverFlags flags;

  void attach(CLI::App* app) {
    app->add_option("--vary", vary, "Swept parameter: rank | size | order")
        ->check(CLI::IsMember({"rank", "size", "order"}))
        ->capture_default_str();
    app->add_option("--values", values_str, "Comma separated values of the swept parameter")->capture_default_str();
    app->add_option("--order", order, "Fixed order")->check(CLI::Range(2, 64))->capture_default_str();
    app->add_option("--size", size, "Fixed size")->check(CLI::Range(2, 1 << 20))->capture_default_str();
    app->add_option("--rank", rank, "Fixed rank")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--trials", trials, "Problems per value")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--noise", noise, "clean | noisy | both")->check(CLI::IsMember({"clean", "noisy", "both"}))->capture_default_str();
    app->add_option("--noise-prob", noise_prob, "Bit-flip probability of noisy runs")->check(CLI::Range(0.0, 0.999999))->capture_default_str();
    app->add_option("-o,--out", out, "CSV output path (default stdout)");
    app->add_option("--plot", plot, "Also write an SVG scatter plot");
    flags.attach(app);
  }

  int run() const {
    SweepSpec spec;
    spec.vary = parse_axis(vary);
    std::stringstream ss(values_str);
    for (std::string tok; std::getline(ss, tok, ',');) {
      try {
        const auto v = std::stoul(tok);
        if (v == 0) throw std::invalid_argument("zero");
        spec.values.push_back(v);
      } catch (const std::exception&) {
        throw UsageError("--values: '" + tok + "' is not a positive integer");
      }
    }
    spec.order = order;
    spec.size = size;
    spec.rank = rank;
    spec.trials = trials;
    spec.noise = parse_noise_mode(noise);
    spec.noise_prob = noise_prob;
    spec.bmf = flags.bmf(1);
    spec.seed = flags.seed;
    const auto records = run_sweep(spec, flags.jobs);

    std::ostringstream csv;
    write_csv(csv, records);
    emit(out, csv.str());
    if (!plot.empty()) {
      std::ostringstream svg;
      write_svg(svg, records, spec.vary);
      write_file(plot, svg.str());
    }
    for (const auto& r : records)
      if (r.failure) std::cerr << "trial failed (seed " << r.seed << "): " << *r.failure << "\n";
    for (const auto& row : summarize(records, spec.vary)) {
      std::cerr << vary << "=" << row.value << (row.noisy ? " noisy" : " clean") << "  n=" << row.count
                << "  error " << row.mean_error << " +- " << row.sd_error << "  solver "
                << row.mean_solver_ms << " ms\n";
    }
    return kOk;
  }
};

struct ServeCmd {
  std::string host = "127.0.0.1";
  int port = 8765;
  std::size_t max_in_flight = 64;
  SolverFlags flags;

  void attach(CLI::App* app) {
    app->add_option("--host", host, "Bind address")->capture_default_str();
    app->add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535))->capture_default_str();
    app->add_option("--max-in-flight", max_in_flight, "Concurrent solves before answering 503")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--sweeps", flags.sweeps, "Sweeps per anneal")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--beta-min", flags.beta_min, "Initial inverse temperature")->capture_default_str();
    app->add_option("--beta-max", flags.beta_max, "Final inverse temperature")->capture_default_str();
  }

  int run() const {
    ServerOptions opts;
    opts.sampler.sweeps = flags.sweeps;
    opts.sampler.beta_range = {flags.beta_min, flags.beta_max};
    opts.sampler.validate();
    opts.max_in_flight = max_in_flight;

    // Signals are taken synchronously by a dedicated thread; block them before
    // the server spawns its workers so they inherit the mask.
    sigset_t sigs;
    sigemptyset(&sigs);
    sigaddset(&sigs, SIGINT);
    sigaddset(&sigs, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &sigs, nullptr);

    SolverServer server(opts);
    int bound = port;
    if (port == 0) {
      bound = server.bind_any(host);
      if (bound < 0) throw std::runtime_error("cannot bind " + host);
    } else if (!server.bind(host, port)) {
      throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    }
    std::cerr << "listening on http://" << host << ":" << bound << std::endl;

    std::thread waiter([&] {
      int sig = 0;
      sigwait(&sigs, &sig);
      server.stop();
    });
    const bool clean = server.run();
    kill(getpid(), SIGTERM);  // release the waiter if the server stopped on its own
    waiter.join();
    std::cerr << "server stopped" << std::endl;
    return clean ? kOk : kRuntime;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boolean hierarchical Tucker network decomposition"};
  app.require_subcommand(1);

  GenerateCmd gen;
  DecomposeCmd dec;
  ReconstructCmd rec;
  BmfCmd bmf;
  BenchCmd bench;
  ServeCmd serve;
  gen.attach(app.add_subcommand("generate", "Write a synthetic tensor with a known exact network"));
  dec.attach(app.add_subcommand("decompose", "Compute a network for a tensor"));
  rec.attach(app.add_subcommand("reconstruct", "Contract a network back into a tensor"));
  bmf.attach(app.add_subcommand("bmf", "Boolean matrix factorization X ~ A B"));
  bench.attach(app.add_subcommand("bench", "Run a rank/size/order sweep and write CSV"));
  serve.attach(app.add_subcommand("serve", "Run the reference remote solver"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (app.got_subcommand("generate")) return gen.run();
    if (app.got_subcommand("decompose")) return dec.run();
    if (app.got_subcommand("reconstruct")) return rec.run();
    if (app.got_subcommand("bmf")) return bmf.run();
    if (app.got_subcommand("bench")) return bench.run();
    if (app.got_subcommand("serve")) return serve.run();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    // Configuration rejected by a validate() call.
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kParse;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
