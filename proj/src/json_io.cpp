#include "finsler/json_io.hpp"

namespace finsler {

nlohmann::json matrix_to_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json vector_to_json(const Vec& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Mat json_matrix(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw InputError(std::string(what) + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_array() || static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != cols) {
      throw InputError(std::string(what) + ": ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Vec json_vector(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw InputError(std::string(what) + ": expected a numeric array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace finsler
