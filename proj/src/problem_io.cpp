#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mixlab/losses.hpp"

namespace mixlab {

using nlohmann::json;

namespace {

constexpr const char* kProblemFormat = "mixlab.problem/1";

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json matrix_json(const Matrix& a) {
  json rows = json::array();
  for (int i = 0; i < a.rows(); ++i) rows.push_back(vector_json(a.row(i).transpose()));
  return rows;
}

json loss_json(const QuadraticDomainLoss& loss) {
  return {{"A", matrix_json(loss.A.entries())}, {"b", vector_json(loss.b)}, {"c", loss.c}};
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const char* what) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(ErrorCode::kConfig, std::string(what) + ": unknown key '" + key + "'");
  }
}

Vector vector_from(const json& j, const char* what) {
  if (!j.is_array()) fail(ErrorCode::kConfig, std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

QuadraticDomainLoss loss_from(const json& j, int d, const char* what) {
  if (!j.is_object()) fail(ErrorCode::kConfig, std::string(what) + " must be an object");
  reject_unknown(j, {"A", "b", "c"}, what);
  const json& a = j.at("A");
  if (!a.is_array() || static_cast<int>(a.size()) != d) fail(ErrorCode::kShape, std::string(what) + ": A must be d x d");
  Matrix m(d, d);
  for (int i = 0; i < d; ++i) {
    const Vector row = vector_from(a[i], "A row");
    check_same_size(row.size(), d, what);
    m.row(i) = row.transpose();
  }
  QuadraticDomainLoss loss{SymMatrix(std::move(m)), vector_from(j.at("b"), "b"), j.value("c", 0.0)};
  check_same_size(loss.b.size(), d, what);
  return loss;
}

}  // namespace

std::string problem_to_json(const ProblemSpec& spec) {
  json domains = json::array();
  for (const auto& d : spec.domains) domains.push_back(loss_json(d));
  json doc = {{"format", kProblemFormat},
              {"dim", spec.dim()},
              {"num_domains", spec.num_domains()},
              {"domains", domains},
              {"validation", loss_json(spec.validation)},
              {"operating_radius", spec.operating_radius},
              {"constants",
               {{"mu", spec.mu}, {"L", spec.L}, {"G", spec.G}, {"G_V", spec.G_V}, {"L_V", spec.L_V}, {"D", spec.D}}}};
  return doc.dump(2);
}

ProblemSpec problem_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("problem JSON: ") + e.what());
  }
  try {
    reject_unknown(doc, {"format", "dim", "num_domains", "domains", "validation", "operating_radius", "constants"},
                   "problem");
    if (doc.contains("format") && doc["format"] != kProblemFormat) {
      fail(ErrorCode::kConfig, "unsupported problem format " + doc["format"].dump());
    }
    const int d = doc.at("dim").get<int>();
    check_dim(d, "problem");
    const json& dj = doc.at("domains");
    if (!dj.is_array()) fail(ErrorCode::kConfig, "domains must be an array");
    if (doc.contains("num_domains") && doc["num_domains"].get<std::size_t>() != dj.size()) {
      fail(ErrorCode::kShape, "num_domains disagrees with the domain list");
    }
    std::vector<QuadraticDomainLoss> domains;
    for (const auto& item : dj) domains.push_back(loss_from(item, d, "domain"));
    QuadraticDomainLoss validation = loss_from(doc.at("validation"), d, "validation");
    DeclaredConstants declared;
    if (doc.contains("constants")) {
      const json& c = doc["constants"];
      reject_unknown(c, {"mu", "L", "G", "G_V", "L_V", "D"}, "constants");
      if (c.contains("mu")) declared.mu = c["mu"].get<double>();
      if (c.contains("L")) declared.L = c["L"].get<double>();
      if (c.contains("G")) declared.G = c["G"].get<double>();
      if (c.contains("G_V")) declared.G_V = c["G_V"].get<double>();
      if (c.contains("L_V")) declared.L_V = c["L_V"].get<double>();
    }
    ProblemSpec spec =
        make_problem(std::move(domains), std::move(validation), doc.value("operating_radius", 10.0), declared);
    if (doc.contains("constants") && doc["constants"].contains("D")) {
      const double declared_d = doc["constants"]["D"].get<double>();
      if (std::abs(declared_d - spec.D) > 1e-9 * std::max(1.0, spec.D)) {
        fail(ErrorCode::kShape, "declared D does not match the domain minimizers");
      }
    }
    return spec;
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("problem JSON: ") + e.what());
  }
}

ProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open problem file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return problem_from_json(ss.str());
}

void save_problem(const ProblemSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write problem file " + path);
  out << problem_to_json(spec) << '\n';
}

}  // namespace mixlab
