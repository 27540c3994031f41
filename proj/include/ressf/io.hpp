#pragma once

// JSON model files:
//   { "h0": [[x, ...], ...], "frame": [[...]], "j": [[...]], "lambda": 0.5, "interval": [a, b] }
// Matrices are lists of rows. An entry is a real number or a [re, im] pair. "frame"
// defaults to the identity; "lambda" and "interval" are optional.

#include "ressf/model.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <sstream>

namespace ressf {

struct ModelFile {
  FramedModel model;
  std::optional<double> lambda;
  std::optional<std::pair<double, double>> interval;
};

namespace detail {

inline cplx json_entry(const nlohmann::json& e, const std::string& where) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return {e[0].get<double>(), e[1].get<double>()};
  throw Error(ErrorCode::InvalidInput, where + " must be a number or a [re, im] pair");
}

inline CMatrix json_matrix(const nlohmann::json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::InvalidInput, "\"" + name + "\" must be a non-empty list of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty())
    throw Error(ErrorCode::InvalidInput, "\"" + name + "\" row 0 must be a non-empty list");
  const std::size_t cols = j[0].size();
  CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw Error(ErrorCode::DimensionMismatch, "\"" + name + "\" row " + std::to_string(i) + " has length " +
                                                    std::to_string(j[i].is_array() ? j[i].size() : 0) +
                                                    ", expected " + std::to_string(cols));
    for (std::size_t k = 0; k < cols; ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          json_entry(j[i][k], name + "[" + std::to_string(i) + "][" + std::to_string(k) + "]");
  }
  return m;
}

}  // namespace detail

inline ModelFile parse_model(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidInput, "model file must hold a JSON object");
  for (const char* key : {"h0", "j"})
    if (!doc.contains(key)) throw Error(ErrorCode::InvalidInput, std::string("missing \"") + key + "\"");
  const HermitianMatrix h0(detail::json_matrix(doc["h0"], "h0"), "h0");
  const HermitianMatrix j(detail::json_matrix(doc["j"], "j"), "j");
  const Frame frame = doc.contains("frame") ? Frame(detail::json_matrix(doc["frame"], "frame")) : Frame::identity(h0.dim());
  ModelFile out{FramedModel(h0, frame, Direction{j}), std::nullopt, std::nullopt};
  if (doc.contains("lambda")) {
    if (!doc["lambda"].is_number()) throw Error(ErrorCode::InvalidInput, "\"lambda\" must be a number");
    out.lambda = doc["lambda"].get<double>();
  }
  if (doc.contains("interval")) {
    const auto& iv = doc["interval"];
    if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number())
      throw Error(ErrorCode::InvalidInput, "\"interval\" must be [a, b]");
    const double a = iv[0].get<double>(), b = iv[1].get<double>();
    if (!(a < b)) throw Error(ErrorCode::InvalidInput, "\"interval\" needs a < b");
    out.interval = std::make_pair(a, b);
  }
  return out;
}

inline ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open model file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, "malformed JSON in " + path + ": " + e.what());
  }
  return parse_model(doc);
}

inline nlohmann::json matrix_to_json(const CMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json model_to_json(const FramedModel& m) {
  return {{"h0", matrix_to_json(m.h0().matrix())},
          {"frame", matrix_to_json(m.frame().matrix())},
          {"j", matrix_to_json(m.j().matrix())}};
}

}  // namespace ressf
