#pragma once

#include <Eigen/Dense>
#include <string>

namespace nile {

/// Column-oriented table of observations (X, Y, A). The latent confounder H
/// is kept only when a sampler is asked to expose it for oracle tests.
struct Dataset {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd a;
  Eigen::VectorXd h;  // empty unless requested
  bool has_latent() const { return h.size() == x.size() && x.size() > 0; }
  Eigen::Index n() const { return x.size(); }
};

/// CSV with header `x,y,a`, 17 significant digits per value.
std::string dataset_to_csv(const Dataset& data);
void write_dataset_csv(const Dataset& data, const std::string& path);

/// Parse errors carry the offending 1-based line number.
Dataset read_dataset_csv(const std::string& path);
Dataset parse_dataset_csv(const std::string& text);

std::string format_double(double v);  // %.17g

}  // namespace nile
