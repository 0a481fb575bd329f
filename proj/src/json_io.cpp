#include "slsdp/json_io.hpp"

#include <stdexcept>
#include <string>

namespace slsdp {

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& doc,
                                 const std::string& key) {
  if (!doc.is_array()) {
    throw std::invalid_argument(key + " must be an array of arrays");
  }
  const auto rows = static_cast<Eigen::Index>(doc.size());
  if (rows == 0) {
    return Eigen::MatrixXd(0, 0);
  }
  const auto cols = static_cast<Eigen::Index>(doc.front().size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = doc[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw std::invalid_argument(key + " rows have inconsistent lengths");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
  }
  return m;
}

nlohmann::json block_series_to_json(
    const std::vector<Eigen::MatrixXd>& blocks) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& b : blocks) {
    out.push_back(matrix_to_json(b));
  }
  return out;
}

std::vector<Eigen::MatrixXd> block_series_from_json(const nlohmann::json& doc,
                                                    const std::string& key) {
  if (!doc.is_array()) {
    throw std::invalid_argument(key + " must be an array of matrices");
  }
  std::vector<Eigen::MatrixXd> out;
  out.reserve(doc.size());
  std::size_t idx = 0;
  for (const auto& entry : doc) {
    out.push_back(matrix_from_json(entry, key + "[" + std::to_string(idx++) +
                                              "]"));
  }
  return out;
}

}  // namespace

nlohmann::json to_json(const Plant& plant) {
  return nlohmann::json{{"nx", plant.nx()}, {"nu", plant.nu()},
                        {"ny", plant.ny()}, {"A", matrix_to_json(plant.A)},
                        {"B", matrix_to_json(plant.B)},
                        {"C", matrix_to_json(plant.C)}};
}

Plant plant_from_json(const nlohmann::json& doc) {
  return Plant(matrix_from_json(doc.at("A"), "A"),
               matrix_from_json(doc.at("B"), "B"),
               matrix_from_json(doc.at("C"), "C"));
}

nlohmann::json to_json(const SystemResponse& resp) {
  nlohmann::json doc;
  doc["T"] = resp.horizon;
  doc["nx"] = resp.phi_xx.empty() ? 0 : resp.phi_xx.front().rows();
  doc["nu"] = resp.phi_ux.empty() ? 0 : resp.phi_ux.front().rows();
  doc["ny"] = resp.phi_xy.empty() ? 0 : resp.phi_xy.front().cols();
  doc["phi_xx"] = block_series_to_json(resp.phi_xx);
  doc["phi_xy"] = block_series_to_json(resp.phi_xy);
  doc["phi_ux"] = block_series_to_json(resp.phi_ux);
  doc["phi_uy"] = block_series_to_json(resp.phi_uy);
  return doc;
}

SystemResponse response_from_json(const nlohmann::json& doc) {
  SystemResponse resp;
  resp.horizon = doc.at("T").get<Eigen::Index>();
  resp.phi_xx = block_series_from_json(doc.at("phi_xx"), "phi_xx");
  resp.phi_xy = block_series_from_json(doc.at("phi_xy"), "phi_xy");
  resp.phi_ux = block_series_from_json(doc.at("phi_ux"), "phi_ux");
  resp.phi_uy = block_series_from_json(doc.at("phi_uy"), "phi_uy");
  const auto expected = static_cast<std::size_t>(resp.horizon) + 1;
  if (resp.phi_xx.size() != expected || resp.phi_xy.size() != expected ||
      resp.phi_ux.size() != expected || resp.phi_uy.size() != expected) {
    throw std::invalid_argument(
        "response block counts do not match the horizon");
  }
  return resp;
}

nlohmann::json response_document(const Plant& plant,
                                 const SystemResponse& resp) {
  nlohmann::json doc = to_json(resp);
  doc["A"] = matrix_to_json(plant.A);
  doc["B"] = matrix_to_json(plant.B);
  doc["C"] = matrix_to_json(plant.C);
  doc["nx"] = plant.nx();
  doc["nu"] = plant.nu();
  doc["ny"] = plant.ny();
  return doc;
}

nlohmann::json to_json(const ResidualReport& report) {
  nlohmann::json doc;
  doc["dynamics"] = report.dynamics;
  doc["transition"] = report.transition;
  doc["initial"] = report.initial;
  doc["termination"] = report.termination;
  doc["max_residual"] = report.max_residual();
  return doc;
}

}  // namespace slsdp
