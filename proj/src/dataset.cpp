#include "nile/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace nile {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string dataset_to_csv(const Dataset& data) {
  std::ostringstream out;
  out << "x,y,a\n";
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << format_double(data.x[i]) << ',' << format_double(data.y[i]) << ','
        << format_double(data.a[i]) << '\n';
  }
  return out.str();
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << dataset_to_csv(data);
}

Dataset parse_dataset_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv line 1: empty input");
  // tolerate trailing CR from foreign files
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y,a")
    throw std::runtime_error("csv line 1: expected header 'x,y,a', got '" + line + "'");

  std::vector<double> xs, ys, as;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double vals[3];
    for (int c = 0; c < 3; ++c) {
      if (!std::getline(row, cell, ',')) {
        throw std::runtime_error("csv line " + std::to_string(line_no) +
                                 ": expected 3 columns (x,y,a)");
      }
      try {
        size_t used = 0;
        vals[c] = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw std::runtime_error("csv line " + std::to_string(line_no) +
                                 ": not a number: '" + cell + "'");
      }
    }
    if (std::getline(row, cell, ','))
      throw std::runtime_error("csv line " + std::to_string(line_no) +
                               ": expected 3 columns (x,y,a)");
    xs.push_back(vals[0]);
    ys.push_back(vals[1]);
    as.push_back(vals[2]);
  }

  Dataset data;
  data.x = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  data.y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  data.a = Eigen::Map<Eigen::VectorXd>(as.data(), static_cast<Eigen::Index>(as.size()));
  return data;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset_csv(buf.str());
}

}  // namespace nile
