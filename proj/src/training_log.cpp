#include "mirl/training_log.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mirl/format.hpp"

namespace mirl {

void write_training_log_header(std::ostream& os) {
  os << "step,log_likelihood,log_z,grad_norm,ess,mu_d,sigma_d\n";
}

void write_training_log_row(std::ostream& os, const TrainingLogRecord& r) {
  os << r.step << ',' << fmt_double(r.log_likelihood) << ',' << fmt_double(r.log_z) << ','
     << fmt_double(r.grad_norm) << ',' << fmt_double(r.ess) << ','
     << (r.mu_d ? fmt_double(*r.mu_d) : "") << ',' << (r.sigma_d ? fmt_double(*r.sigma_d) : "")
     << '\n';
}

std::vector<TrainingLogRecord> read_training_log(std::istream& is) {
  std::vector<TrainingLogRecord> out;
  std::string line;
  if (!std::getline(is, line)) return out;  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 7) throw std::runtime_error("training log: malformed row '" + line + "'");
    TrainingLogRecord r;
    r.step = std::stol(cells[0]);
    r.log_likelihood = std::stod(cells[1]);
    r.log_z = std::stod(cells[2]);
    r.grad_norm = std::stod(cells[3]);
    r.ess = std::stod(cells[4]);
    if (!cells[5].empty()) r.mu_d = std::stod(cells[5]);
    if (!cells[6].empty()) r.sigma_d = std::stod(cells[6]);
    out.push_back(r);
  }
  return out;
}

}  // namespace mirl
