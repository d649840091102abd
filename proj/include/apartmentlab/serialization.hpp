#pragma once

// JSON exchange formats: class specs, partitions, complex matrices (row-major
// arrays of [re, im] pairs), structural reports and map definition files.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "apartmentlab/spectra.hpp"
#include "apartmentlab/structure.hpp"
#include "apartmentlab/transforms.hpp"

namespace apartmentlab {

using Json = nlohmann::ordered_json;

/// {"eigenvalues": [...], "multiplicities": [...], "dim": n,
///  "allow_assumption_violation": false}. Throws Malformed on shape errors;
/// validation errors come from validate_spec.
ClassSpec spec_from_json(const Json& j);
Json spec_to_json(const ClassSpec& spec);

/// {"slots": [[indices of slot 1], ...], "kernel": [...]}.
LabeledPartition partition_from_json(const ClassSpec& spec, const Json& j);
Json partition_to_json(const LabeledPartition& p);

Matrix matrix_from_json(const Json& j);
Json matrix_to_json(const Matrix& m);

Json perm_to_json(const SymmetryPerm& perm);
Json witness_to_json(const Witness& w);
Json report_to_json(const StructuralReport& report);
Json decomposition_to_json(const Decomposition& d);

/// Generator stanza of a map file.
struct MapGenerator {
  std::uint64_t unitary_seed = 0;
  bool antiunitary = false;
  std::string delta_rule = "identity";
  /// Seed of the first apartment's frame; the standard basis when absent.
  std::optional<std::uint64_t> basis_seed;
  /// Further Haar-random apartments in the domain.
  int extra_apartments = 1;
};

Json generator_to_json(const MapGenerator& g);
MapGenerator generator_from_json(const Json& j);
ModelMap model_from_generator(const ClassSpec& spec, const MapGenerator& g);

struct MapDefinition {
  ClassSpec spec;
  OperatorMap map;
  std::optional<MapGenerator> generator;
};

/// A map file is either a list of [input, output] matrix pairs, or an object
/// with an optional "spec" and either "pairs" (entries [input, output] or
/// {"input": ..., "output": ...}) or "generator". When both are present the
/// pairs are used and the generator is kept as ground truth. `fallback`
/// supplies the class when the file carries none. Throws Malformed on bad
/// shape.
MapDefinition map_from_json(const Json& j, const std::optional<ClassSpec>& fallback);
Json map_to_json(const ClassSpec& spec, const OperatorMap& map);

/// Reads and parses a JSON file; Malformed on I/O or syntax errors.
Json read_json_file(const std::string& path);

}  // namespace apartmentlab
