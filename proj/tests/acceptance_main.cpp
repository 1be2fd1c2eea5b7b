// Runs every acceptance criterion and prints one pass/fail line per
// criterion; exit status reflects the overall verdict.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "jumpfilter/acceptance.hpp"

int main(int argc, char** argv) {
  jumpfilter::AcceptanceOptions opt;
  opt.threads = 4;
  if (const char* env = std::getenv("JUMPFILTER_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) opt.threads = v;
  }
#ifdef JF_CLI_PATH
  opt.cli_path = JF_CLI_PATH;
#endif
  for (int i = 1; i < argc; ++i) opt.only.push_back(std::atoi(argv[i]));
  const auto results = jumpfilter::run_acceptance(opt);
  std::fputs(jumpfilter::render_acceptance_table(results).c_str(), stdout);
  return jumpfilter::all_passed(results) ? 0 : 1;
}
