// Prints one line per acceptance criterion; exits non-zero if any fails.
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "acceptance.hpp"

int main(int argc, char** argv) {
  gsr::verify::Options opts;
  if (const char* d = std::getenv("GSR_DATA_DIR")) opts.data_dir = d;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--data-dir") == 0 && i + 1 < argc) {
      opts.data_dir = argv[++i];
    } else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--data-dir DIR] [--only N]\n", argv[0]);
      return 1;
    }
  }
  int failed = 0;
  for (int id = 1; id <= gsr::verify::kNumCriteria; ++id) {
    if (only != 0 && id != only) continue;
    const auto r = gsr::verify::run_criterion(id, opts);
    std::printf("%s\n", gsr::verify::format_line(r).c_str());
    std::fflush(stdout);
    failed += r.status == gsr::verify::Status::fail ? 1 : 0;
  }
  return failed == 0 ? 0 : 1;
}
