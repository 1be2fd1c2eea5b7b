#pragma once

#include <string>
#include <vector>

namespace jumpfilter {

struct AcceptanceOptions {
  std::vector<int> only;   // criterion ids to run; empty = all (1..11)
  int threads{1};
  std::string cli_path;    // executable used by the determinism criterion
  std::string work_dir{"/tmp/jumpfilter-acceptance"};
};

struct CriterionResult {
  int id{0};
  std::string name;
  bool pass{false};
  std::string details;
  double seconds{0};
};

/// Run the acceptance criteria; results come back in id order.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt);

/// One line per criterion: "[PASS] 1 kernel-calculus ..." plus a summary row.
/// Timings are omitted when include_timing is false (deterministic artifacts).
std::string render_acceptance_table(const std::vector<CriterionResult>& results,
                                    bool include_timing = true);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace jumpfilter
