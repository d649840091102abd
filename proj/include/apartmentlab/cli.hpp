#pragma once

// Command-line front end: enumerate, verify, decompose, model.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "apartmentlab/serialization.hpp"

namespace apartmentlab::cli {

enum ExitCode : int {
  kPass = 0,
  kFail = 1,
  kInputError = 2,
  kCapExceeded = 3,
  kHypothesisViolation = 4,
};

/// Runs one command; `args` excludes the program name. Reports go to `out`
/// (or the --out file), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Enumeration cap, overridden by APARTMENTLAB_CAP. Throws Malformed on a
/// bad value.
std::uint64_t enumeration_cap();

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

struct SuiteResult {
  bool pass = true;
  std::map<std::string, std::int64_t> counters;
  Json witnesses = Json::array();
};

/// Property suite behind `verify --lemma <name>`. `samples` = 0 selects the
/// suite's default. Throws PreconditionViolated when the spec does not meet
/// the lemma's hypotheses.
SuiteResult verify_lemma(const std::string& lemma, const ClassSpec& spec, std::uint64_t seed, std::size_t samples,
                         double tolerance, std::uint64_t cap);

}  // namespace apartmentlab::cli
