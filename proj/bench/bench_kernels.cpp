// Serial reference vs OpenMP kernels. Usage: bench_kernels [repeats]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "surfacegrid/dataset.hpp"
#include "surfacegrid/gauss_synth.hpp"
#include "surfacegrid/geometry.hpp"
#include "surfacegrid/metrics.hpp"

using namespace surfacegrid;

namespace {

double best_of(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-22s %10.4f %10.4f %8.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
  std::printf("threads: %d, best of %d\n", omp_get_max_threads(), repeats);
  std::printf("%-22s %10s %10s %9s\n", "kernel", "serial s", "omp s", "speedup");

  const auto f = synth_function(1, 0);
  volatile double sink = 0;
  row("eval_function",
      best_of(repeats, [&] { sink = eval_function_serial(f).values[0]; }),
      best_of(repeats, [&] { sink = eval_function(f).values[0]; }));

  const auto field = eval_function(f);
  const auto views = DatasetConfig::standard().depth_views;
  row("render_depth x10",
      best_of(repeats, [&] { sink = render_depth_batch_serial(field, views)[0].at(0, 0); }),
      best_of(repeats, [&] { sink = render_depth_batch(field, views)[0].at(0, 0); }));

  const auto a = render_depth(field, views[0]);
  const auto b = render_depth(eval_function(synth_function(1, 1)), views[0]);
  row("msre x100",
      best_of(repeats, [&] { for (int i = 0; i < 100; ++i) sink = msre_serial(a, b); }),
      best_of(repeats, [&] { for (int i = 0; i < 100; ++i) sink = msre(a, b); }));
  row("mae x100",
      best_of(repeats, [&] { for (int i = 0; i < 100; ++i) sink = mae_serial(a, b); }),
      best_of(repeats, [&] { for (int i = 0; i < 100; ++i) sink = mae(a, b); }));

  const auto dir = std::filesystem::temp_directory_path() / "surfacegrid_bench";
  auto tiny_build = [&](int threads) {
    std::filesystem::remove_all(dir);
    build(DatasetConfig::tiny(), dir, {threads});
  };
  row("tiny build", best_of(1, [&] { tiny_build(1); }), best_of(1, [&] { tiny_build(0); }));
  std::filesystem::remove_all(dir);
  return 0;
}
