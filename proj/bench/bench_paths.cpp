// Times the Monte Carlo path kernels serially and under OpenMP, and checks
// that both executions return bit-identical per-path statistics.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "dealer/asymptotics.hpp"
#include "dealer/demand.hpp"
#include "dealer/parallel.hpp"

using namespace dealer;

namespace {

template <class F>
double seconds(F&& f, std::vector<double>& out) {
  const auto start = std::chrono::steady_clock::now();
  out = f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool identical(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP path kernel benchmark"};
  std::size_t paths = 2000;
  std::size_t steps = 4000;
  int threads = 0;
  std::string demand = "brownian(0,1)";
  double lambda = 1e-3;
  app.add_option("--paths", paths, "Monte Carlo paths");
  app.add_option("--steps", steps, "time steps per path");
  app.add_option("--threads", threads, "OpenMP threads (0 keeps the runtime default)");
  app.add_option("--demand", demand, "client demand process");
  app.add_option("--lambda", lambda, "open-market cost");
  CLI11_PARSE(app, argc, argv);

  set_worker_count(threads);
  const PathKernel kernel(DealerPanel{2, 0.1, lambda}, parse_demand(demand), Horizon::uniform(1.0, steps));

  struct Case {
    const char* name;
    double (*stat)(const PathKernel&, NoiseKey);
  };
  const Case cases[] = {
      {"cost", [](const PathKernel& k, NoiseKey key) { return k.cost(key); }},
      {"tracking", [](const PathKernel& k, NoiseKey key) { return k.tracking(key); }},
  };

  std::printf("paths %zu  steps %zu  threads %d  demand %s\n", paths, steps, worker_count(), demand.c_str());
  std::printf("%-10s %12s %12s %9s %s\n", "kernel", "serial [s]", "parallel [s]", "speedup", "identical");
  bool ok = true;
  for (const auto& c : cases) {
    auto run = [&](Execution exec) {
      return [&, exec] {
        return evaluate_paths<double>(paths, [&](std::size_t k) { return c.stat(kernel, NoiseKey{1, k}); }, exec);
      };
    };
    std::vector<double> s, p;
    const double ts = seconds(run(Execution::serial), s);
    const double tp = seconds(run(Execution::parallel), p);
    const bool same = identical(s, p);
    ok = ok && same;
    std::printf("%-10s %12.4f %12.4f %9.2f %s\n", c.name, ts, tp, ts / tp, same ? "yes" : "NO");
  }
  return ok ? 0 : 1;
}
