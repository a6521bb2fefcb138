#include "qgtube/io.hpp"

#include "qgtube/errors.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>

namespace qgtube {

namespace {

const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw ValidationError(where + ": missing \"" + key + "\"");
    return j.at(key);
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ValidationError(where + " must be a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) throw ValidationError(where + " must be finite");
    return x;
}

int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ValidationError(where + " must be an integer");
    return j.get<int>();
}

RobinPair robin_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + " must be an object {\"a\":..,\"b\":..}");
    return {number(field(j, "a", where), where + ".a"), number(field(j, "b", where), where + ".b")};
}

json robin_to_json(const RobinPair& r) { return {{"a", r.a}, {"b", r.b}}; }

}  // namespace

EdgePotential potential_from_json(const json& j) {
    if (j.is_null()) return EdgePotential::zero();
    const std::string type = field(j, "type", "potential").is_string() ? j.at("type").get<std::string>() : "";
    if (type == "zero") return EdgePotential::zero();
    if (type == "samples") {
        const json& vals = field(j, "values", "potential");
        if (!vals.is_array()) throw ValidationError("potential.values must be an array");
        std::vector<double> v;
        for (const auto& x : vals) v.push_back(number(x, "potential.values[]"));
        const double bound = j.contains("bound") ? number(j.at("bound"), "potential.bound") : 1.0;
        return EdgePotential::sampled(std::move(v), bound);
    }
    throw ValidationError("potential.type must be \"zero\" or \"samples\"");
}

json potential_to_json(const EdgePotential& q) {
    if (q.is_zero()) return {{"type", "zero"}};
    return {{"type", "samples"}, {"values", q.samples()}, {"bound", q.bound()}};
}

HalfTubeConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    HalfTubeConfig cfg;
    cfg.params = make_params(integer(field(j, "alpha", "config"), "alpha"), integer(field(j, "beta", "config"), "beta"),
                             integer(field(j, "delta", "config"), "delta"));
    cfg.potential = potential_from_json(j.value("potential", json()));
    const int R = cfg.params.rings();
    if (j.contains("boundary_robin")) {
        const json& br = j.at("boundary_robin");
        if (!br.is_array()) throw ValidationError("boundary_robin must be an array");
        for (std::size_t n = 0; n < br.size(); ++n)
            cfg.boundary_robin.push_back(robin_from_json(br[n], "boundary_robin[" + std::to_string(n) + "]"));
    } else {
        cfg.boundary_robin.assign(static_cast<std::size_t>(R), RobinPair{0.0, 1.0});
    }
    if (j.contains("aux") && !j.at("aux").is_null()) {
        const json& aux = j.at("aux");
        if (!aux.is_object()) throw ValidationError("aux must be an object");
        for (const auto& v : aux.value("vertices", json::array()))
            cfg.aux.vertex_robin.push_back(robin_from_json(v, "aux.vertices[]"));
        const json edges = aux.value("edges", json::array());
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const json& e = edges[i];
            const std::string where = "aux.edges[" + std::to_string(i) + "]";
            const int from = integer(field(e, "from", where), where + ".from");
            const double length = e.contains("length") ? number(e.at("length"), where + ".length") : 1.0;
            const EdgePotential q = potential_from_json(e.value("potential", json()));
            const json& to = field(e, "to", where);
            if (to.is_object() && to.contains("aux")) {
                cfg.aux.internal_edges.push_back({from, integer(to.at("aux"), where + ".to.aux"), length, q});
            } else if (to.is_object() && to.contains("ring")) {
                cfg.aux.attachment_edges.push_back({from, integer(to.at("ring"), where + ".to.ring"), length, q});
            } else {
                throw ValidationError(where + ".to must be {\"aux\":i} or {\"ring\":n}");
            }
        }
    }
    cfg.validate();
    return cfg;
}

json config_to_json(const HalfTubeConfig& cfg) {
    json j;
    j["alpha"] = cfg.params.alpha;
    j["beta"] = cfg.params.beta;
    j["delta"] = cfg.params.delta;
    j["potential"] = potential_to_json(cfg.potential);
    j["boundary_robin"] = json::array();
    for (const auto& r : cfg.boundary_robin) j["boundary_robin"].push_back(robin_to_json(r));
    json aux = {{"vertices", json::array()}, {"edges", json::array()}};
    for (const auto& r : cfg.aux.vertex_robin) aux["vertices"].push_back(robin_to_json(r));
    for (const auto& e : cfg.aux.internal_edges)
        aux["edges"].push_back({{"from", e.from}, {"to", {{"aux", e.to}}}, {"length", e.length},
                                {"potential", potential_to_json(e.potential)}});
    for (const auto& e : cfg.aux.attachment_edges)
        aux["edges"].push_back({{"from", e.from}, {"to", {{"ring", e.ring}}}, {"length", e.length},
                                {"potential", potential_to_json(e.potential)}});
    j["aux"] = aux;
    return j;
}

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

json matrix_to_json(const Eigen::MatrixXcd& m) {
    json data = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index k = 0; k < m.cols(); ++k) data.push_back(complex_to_json(m(i, k)));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

json vector_to_json(const Eigen::VectorXcd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
    return out;
}

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_band_svg(std::ostream& os, const std::vector<BandDiagramCurve>& curves, const std::vector<Band>& bands,
                    double lo, double hi, const TubeParams& p) {
    constexpr double W = 720, H = 540, left = 60, right = 110, top = 20, bottom = 40;
    const double pw = W - left - right, ph = H - top - bottom;
    const double pi = std::numbers::pi;
    auto X = [&](double k) { return left + (k + pi) / (2 * pi) * pw; };
    auto Y = [&](double l) { return top + (hi - l) / (hi - lo) * ph; };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = -2; t <= 2; ++t) {
        const double k = t * pi / 2;
        os << "<line x1=\"" << format_double(X(k)) << "\" y1=\"" << top + ph << "\" x2=\"" << format_double(X(k))
           << "\" y2=\"" << top + ph + 5 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << format_double(X(k)) << "\" y=\"" << top + ph + 18
           << "\" font-size=\"11\" text-anchor=\"middle\">" << format_double(t * 0.5) << "&#960;</text>\n";
    }
    for (int t = 0; t <= 5; ++t) {
        const double l = lo + (hi - lo) * t / 5;
        os << "<text x=\"" << left - 6 << "\" y=\"" << format_double(Y(l) + 4)
           << "\" font-size=\"11\" text-anchor=\"end\">" << format_double(std::round(l * 100) / 100) << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 6 << "\" font-size=\"12\" text-anchor=\"middle\">k  (alpha="
       << p.alpha << ", beta=" << p.beta << ", delta=" << p.delta << ")</text>\n";
    os << "<text x=\"14\" y=\"" << top + ph / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 " << top + ph / 2
       << ")\" text-anchor=\"middle\">lambda</text>\n";

    for (const auto& c : curves) {
        const char* col = colors[static_cast<std::size_t>(c.ell) % 6];
        std::string pts;
        auto flush = [&] {
            if (!pts.empty())
                os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1\" points=\"" << pts << "\"/>\n";
            pts.clear();
        };
        for (const auto& [k, l] : c.points) {
            if (!std::isfinite(l)) {
                flush();
                continue;
            }
            pts += format_double(std::round(X(k) * 100) / 100) + "," + format_double(std::round(Y(l) * 100) / 100) + " ";
        }
        flush();
    }
    // band intervals, one strip per sector
    for (const auto& b : bands) {
        const double x = left + pw + 12 + 14 * b.ell;
        os << "<rect x=\"" << x << "\" y=\"" << format_double(Y(b.lambda_hi)) << "\" width=\"10\" height=\""
           << format_double(std::max(0.5, Y(b.lambda_lo) - Y(b.lambda_hi))) << "\" fill=\""
           << colors[static_cast<std::size_t>(b.ell) % 6] << "\" fill-opacity=\"0.35\"/>\n";
    }
    os << "</svg>\n";
}

}  // namespace qgtube
