#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace mirl {

/// One row per outer training step, describing the parameters in effect
/// when that step's samples were drawn.
struct TrainingLogRecord {
  long step = 0;
  double log_likelihood = 0.0;  // mean expert return - log Z
  double log_z = 0.0;
  double grad_norm = 0.0;
  double ess = 0.0;  // effective sample size of the importance weights
  std::optional<double> mu_d;
  std::optional<double> sigma_d;

  bool operator==(const TrainingLogRecord&) const = default;
};

void write_training_log_header(std::ostream& os);
void write_training_log_row(std::ostream& os, const TrainingLogRecord& r);
std::vector<TrainingLogRecord> read_training_log(std::istream& is);

}  // namespace mirl
