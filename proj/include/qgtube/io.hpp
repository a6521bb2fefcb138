#pragma once

#include "qgtube/bands.hpp"
#include "qgtube/halftube.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace qgtube {

using json = nlohmann::json;

/// {"type":"zero"} or {"type":"samples","values":[...],"bound":C}
EdgePotential potential_from_json(const json& j);
json potential_to_json(const EdgePotential& q);

/// Config schema:
/// {"alpha":..,"beta":..,"delta":..,"potential":..,
///  "boundary_robin":[{"a":..,"b":..},..],
///  "aux":{"vertices":[{"a":..,"b":..},..],
///         "edges":[{"from":i,"to":{"aux":j}|{"ring":n},"length":..,"potential":..},..]}}
/// Missing potential means zero, missing boundary_robin means Neumann.
/// Throws ValidationError (or ParameterError from make_params) on bad input.
HalfTubeConfig config_from_json(const json& j);
json config_to_json(const HalfTubeConfig& cfg);

json complex_to_json(cplx z);                      // [re, im]
json matrix_to_json(const Eigen::MatrixXcd& m);    // {"rows","cols","data":[[re,im],..]} row-major
json vector_to_json(const Eigen::VectorXcd& v);    // [[re,im],..]

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

/// Band diagram: lambda(k) curves per sector plus band intervals in a side strip.
void write_band_svg(std::ostream& os, const std::vector<BandDiagramCurve>& curves, const std::vector<Band>& bands,
                    double lo, double hi, const TubeParams& p);

}  // namespace qgtube
