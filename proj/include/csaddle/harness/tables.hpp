#pragma once

#include <string>
#include <vector>

#include "csaddle/harness/config.hpp"

namespace csaddle::harness {

/// One comparison cell of a reproduced table. Iteration/cycle counts are
/// non-negative; divergence is encoded in the flags ("infinity" cells).
struct TableCell {
  std::string table;
  double dt = 0.0;
  std::string col;  // "err=1e-4" or "cap=50"
  SchemeKind scheme = SchemeKind::CS;
  long measured = -1;
  bool measured_diverged = false;
  long reference = -1;
  bool reference_diverged = false;
  std::string source;
  enum class Status { Pass, Soft, Fail } status = Status::Fail;
};

struct TableResult {
  std::string id;
  std::vector<TableCell> cells;
  int hard_failures = 0;
  int soft_failures = 0;
};

const std::vector<std::string>& table_ids();

/// Run the full (dt x stop x scheme) grid of one of the paper's tables,
/// compare against the embedded reference data, and write `<id>.csv` into
/// out_dir. Divergence is data, not an error.
TableResult reproduce_table(const std::string& id, const std::string& out_dir,
                            const std::string& data_dir = "");

std::string default_data_dir();

}  // namespace csaddle::harness
