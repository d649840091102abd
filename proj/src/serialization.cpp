#include "apartmentlab/serialization.hpp"

#include <fstream>
#include <sstream>

#include "apartmentlab/error.hpp"

namespace apartmentlab {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::Malformed, what); }

template <typename T>
T get_as(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    malformed(std::string("field '") + key + "' is missing or has the wrong type");
  }
}

std::vector<int> int_list(const Json& j, const char* what) {
  if (!j.is_array()) malformed(std::string(what) + " must be an array");
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) malformed(std::string(what) + " must hold integers");
    out.push_back(v.get<int>());
  }
  return out;
}

Json pair_to_json(PairIndex p) { return Json::array({p.i, p.j}); }

Json subfamily_to_json(const SpecialSubfamily& s) {
  Json out = Json::object();
  out["kind"] = s.kind == SubfamilyKind::Star ? "star" : "triangle";
  if (s.kind == SubfamilyKind::Star) out["center"] = s.center;
  out["pairs"] = Json::array();
  for (const auto& p : s.pairs) out["pairs"].push_back(pair_to_json(p));
  return out;
}

}  // namespace

ClassSpec spec_from_json(const Json& j) {
  if (!j.is_object()) malformed("spec must be a JSON object");
  RawSpec raw;
  const Json& values = j.contains("eigenvalues") ? j.at("eigenvalues") : Json();
  if (!values.is_array()) malformed("field 'eigenvalues' must be an array");
  for (const auto& v : values) {
    if (!v.is_number()) malformed("eigenvalues must be numbers");
    raw.eigenvalues.push_back(v.get<double>());
  }
  raw.multiplicities = int_list(j.contains("multiplicities") ? j.at("multiplicities") : Json(), "multiplicities");
  raw.dim = get_as<int>(j, "dim");
  if (j.contains("allow_assumption_violation")) raw.allow_assumption_violation = get_as<bool>(j, "allow_assumption_violation");
  return validate_spec(raw);
}

Json spec_to_json(const ClassSpec& spec) {
  Json out = Json::object();
  out["eigenvalues"] = spec.eigenvalues();
  out["multiplicities"] = spec.multiplicities();
  out["dim"] = spec.dim();
  out["allow_assumption_violation"] = spec.assumption_override();
  return out;
}

LabeledPartition partition_from_json(const ClassSpec& spec, const Json& j) {
  if (!j.is_object() || !j.contains("slots")) malformed("partition needs a 'slots' array");
  const Json& slots = j.at("slots");
  if (!slots.is_array() || static_cast<int>(slots.size()) != spec.num_eigenvalues())
    throw Error(ErrorCode::InvalidPartition, "partition must list one block per nonzero eigenvalue");
  LabeledPartition p{std::vector<int>(static_cast<std::size_t>(spec.dim()), -1)};
  auto place = [&](const std::vector<int>& block, int slot) {
    for (int b : block) {
      if (b < 0 || b >= spec.dim() || p.slot_of[static_cast<std::size_t>(b)] != -1)
        throw Error(ErrorCode::InvalidPartition, "block index out of range or repeated");
      p.slot_of[static_cast<std::size_t>(b)] = slot;
    }
  };
  for (std::size_t s = 0; s < slots.size(); ++s) place(int_list(slots[s], "slot block"), static_cast<int>(s) + 1);
  if (j.contains("kernel")) place(int_list(j.at("kernel"), "kernel"), 0);
  for (auto& s : p.slot_of)
    if (s == -1) s = 0;
  validate_partition(spec, p);
  return p;
}

Json partition_to_json(const LabeledPartition& p) {
  int top = 0;
  for (int s : p.slot_of) top = std::max(top, s);
  Json out = Json::object();
  out["slots"] = Json::array();
  for (int s = 1; s <= top; ++s) out["slots"].push_back(p.block(s));
  out["kernel"] = p.kernel();
  return out;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) malformed("matrix must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) malformed("matrix rows must be arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) malformed("matrix rows differ in length");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& entry = row[static_cast<std::size_t>(c)];
      if (entry.is_number()) {
        m(r, c) = Complex(entry.get<double>(), 0.0);
      } else if (entry.is_array() && entry.size() == 2 && entry[0].is_number() && entry[1].is_number()) {
        m(r, c) = Complex(entry[0].get<double>(), entry[1].get<double>());
      } else {
        malformed("matrix entries must be [re, im] pairs");
      }
    }
  }
  return m;
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    out.push_back(std::move(row));
  }
  return out;
}

Json perm_to_json(const SymmetryPerm& perm) { return perm.mapping; }

Json witness_to_json(const Witness& w) {
  Json out = Json::object();
  out["kind"] = w.kind;
  if (!w.pairs.empty()) {
    out["pairs"] = Json::array();
    for (const auto& p : w.pairs) out["pairs"].push_back(pair_to_json(p));
  }
  if (!w.operators.empty()) {
    out["operators"] = Json::array();
    for (const auto& p : w.operators) out["operators"].push_back(partition_to_json(p));
  }
  if (!w.subfamilies.empty()) {
    out["subfamilies"] = Json::array();
    for (const auto& s : w.subfamilies) out["subfamilies"].push_back(subfamily_to_json(s));
  }
  if (!w.note.empty()) out["note"] = w.note;
  return out;
}

Json report_to_json(const StructuralReport& report) {
  Json out = Json::object();
  out["verdict"] = report.verdict;
  out["tag"] = report.tag;
  out["counts"] = Json::object();
  for (const auto& [k, v] : report.counts) out["counts"][k] = v;
  out["witnesses"] = Json::array();
  for (const auto& w : report.witnesses) out["witnesses"].push_back(witness_to_json(w));
  if (report.seed) out["seed"] = *report.seed;
  return out;
}

Json decomposition_to_json(const Decomposition& d) {
  Json out = Json::object();
  out["unitary"] = matrix_to_json(d.unitary.columns());
  out["antiunitary"] = d.antiunitary;
  out["flag_ambiguous"] = d.flag_ambiguous;
  out["phases_fixed"] = d.phases_fixed;
  out["residual"] = d.residual;
  out["apartments"] = d.apartment_bases.size();
  Json table = Json::array();
  for (std::size_t i = 0; i < d.operators.size(); ++i) {
    const auto& op = d.operators[i];
    Json row = Json::object();
    row["index"] = i;
    row["apartment"] = op.apartment;
    row["partition"] = partition_to_json(op.partition);
    row["delta"] = perm_to_json(op.delta);
    row["residual"] = op.residual;
    if (op.ambiguous) row["ambiguous"] = true;
    table.push_back(std::move(row));
  }
  out["operators"] = std::move(table);
  return out;
}

Json generator_to_json(const MapGenerator& g) {
  Json out = Json::object();
  out["unitary_seed"] = g.unitary_seed;
  out["antiunitary"] = g.antiunitary;
  out["delta_rule"] = g.delta_rule;
  if (g.basis_seed) out["basis_seed"] = *g.basis_seed;
  out["extra_apartments"] = g.extra_apartments;
  return out;
}

MapGenerator generator_from_json(const Json& j) {
  if (!j.is_object()) malformed("generator must be an object");
  MapGenerator g;
  g.unitary_seed = get_as<std::uint64_t>(j, "unitary_seed");
  if (j.contains("antiunitary")) g.antiunitary = get_as<bool>(j, "antiunitary");
  if (j.contains("delta_rule")) g.delta_rule = get_as<std::string>(j, "delta_rule");
  if (j.contains("basis_seed")) g.basis_seed = get_as<std::uint64_t>(j, "basis_seed");
  if (j.contains("extra_apartments")) g.extra_apartments = get_as<int>(j, "extra_apartments");
  if (g.extra_apartments < 0) malformed("extra_apartments must be non-negative");
  return g;
}

ModelMap model_from_generator(const ClassSpec& spec, const MapGenerator& g) {
  std::vector<Basis> domain;
  domain.push_back(g.basis_seed ? Basis::random(spec.dim(), *g.basis_seed) : Basis::standard(spec.dim()));
  const std::uint64_t base = g.basis_seed.value_or(0) ^ 0xa5a5a5a5ULL;
  for (int k = 1; k <= g.extra_apartments; ++k)
    domain.push_back(Basis::random(spec.dim(), base + static_cast<std::uint64_t>(k)));
  return make_model_map(spec, Basis::random(spec.dim(), g.unitary_seed), g.antiunitary,
                        DeltaRule::parse(g.delta_rule), std::move(domain));
}

MapDefinition map_from_json(const Json& j, const std::optional<ClassSpec>& fallback) {
  std::optional<ClassSpec> spec = fallback;
  const Json* pairs = nullptr;
  if (j.is_array()) {
    pairs = &j;
  } else if (j.is_object()) {
    if (j.contains("spec")) spec = spec_from_json(j.at("spec"));
    if (j.contains("pairs")) pairs = &j.at("pairs");
  } else {
    malformed("map file must be an array of pairs or an object");
  }
  if (!spec) malformed("map file carries no spec and none was given");

  std::optional<MapGenerator> generator;
  if (j.is_object() && j.contains("generator")) generator = generator_from_json(j.at("generator"));
  if (pairs == nullptr) {
    if (!generator) malformed("map file needs 'pairs' or 'generator'");
    return {*spec, realize(model_from_generator(*spec, *generator)), generator};
  }
  if (!pairs->is_array()) malformed("'pairs' must be an array");
  OperatorMap map;
  for (const auto& entry : *pairs) {
    const Json* in = nullptr;
    const Json* out = nullptr;
    if (entry.is_array() && entry.size() == 2) {
      in = &entry[0];
      out = &entry[1];
    } else if (entry.is_object() && entry.contains("input") && entry.contains("output")) {
      in = &entry.at("input");
      out = &entry.at("output");
    } else {
      malformed("map entries must be [input, output] or {\"input\", \"output\"}");
    }
    try {
      map.push_back({HermitianOperator(matrix_from_json(*in)), HermitianOperator(matrix_from_json(*out))});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Malformed) throw;
      malformed(std::string("map entry ") + std::to_string(map.size()) + ": " + e.what());
    }
  }
  return {*spec, std::move(map), generator};
}

Json map_to_json(const ClassSpec& spec, const OperatorMap& map) {
  Json out = Json::object();
  out["spec"] = spec_to_json(spec);
  out["pairs"] = Json::array();
  for (const auto& entry : map)
    out["pairs"].push_back(Json::array({matrix_to_json(entry.input.matrix()), matrix_to_json(entry.output.matrix())}));
  return out;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) malformed("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    malformed(path + ": " + e.what());
  }
}

}  // namespace apartmentlab
