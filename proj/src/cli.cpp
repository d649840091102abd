#include "apartmentlab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <random>
#include <set>

#include <CLI11.hpp>

#include "apartmentlab/apartments.hpp"
#include "apartmentlab/error.hpp"
#include "apartmentlab/structure.hpp"
#include "apartmentlab/transforms.hpp"

namespace apartmentlab::cli {

namespace {

constexpr std::size_t kWitnessLimit = 20;
constexpr std::size_t kExhaustivePairLimit = 100'000;
constexpr std::size_t kSampledPairs = 10'000;

void add_witness(SuiteResult& r, Json w) {
  if (r.witnesses.size() < kWitnessLimit) r.witnesses.push_back(std::move(w));
}

void fail(SuiteResult& r, const std::string& counter, Json w) {
  r.pass = false;
  ++r.counters[counter];
  w["kind"] = counter;
  add_witness(r, std::move(w));
}

Json pair_json(PairIndex p) { return Json::array({p.i, p.j}); }

std::vector<int> intersect(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<int> difference(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool contains(const std::vector<int>& sorted, int x) { return std::binary_search(sorted.begin(), sorted.end(), x); }

void require(bool condition, const std::string& what) {
  if (!condition) throw Error(ErrorCode::PreconditionViolated, what);
}

// Operator index pairs: exhaustive when small, a seeded sample otherwise.
std::vector<IndexPair> operator_pairs(std::size_t count, std::size_t samples, std::mt19937_64& rng) {
  const std::size_t total = count < 2 ? 0 : count * (count - 1) / 2;
  if (samples == 0) samples = total <= kExhaustivePairLimit ? total : kSampledPairs;
  return sample_index_pairs(count, samples, rng());
}

Json pair_witness(const LabeledPartition& p, const LabeledPartition& q) {
  Json w = Json::object();
  w["first"] = partition_to_json(p);
  w["second"] = partition_to_json(q);
  return w;
}

SuiteResult suite_in(const ClassSpec& spec, std::mt19937_64& rng, std::size_t samples, std::uint64_t cap) {
  SuiteResult r;
  const auto apartment = enumerate_apartment(spec, cap);
  const Basis frame = Basis::standard(spec.dim());
  const auto report = maximal_inexact_subsets(spec, cap);
  for (const auto& info : report.subsets) {
    ++r.counters["a_ij_checked"];
    Json w = Json::object();
    w["pair"] = pair_json(info.pair);
    if (!info.maximal) fail(r, "not_maximal", w);
    const auto members = a_ij_members(apartment, info.pair);
    const auto fused = fused_pairs(members);
    if (!std::binary_search(fused.begin(), fused.end(), info.pair)) fail(r, "not_inexact", w);
    if (auto bad = check_rotated_frame_witness(spec, frame, apartment, info.pair)) {
      w["operator"] = partition_to_json(*bad);
      fail(r, "rotated_frame_mismatch", w);
    } else {
      ++r.counters["rotated_frame_witnesses"];
    }
  }
  for (const auto& pair : report.empty_pairs) {
    ++r.counters["empty_a_ij"];
    Json w = Json::object();
    w["kind"] = "empty_a_ij";
    w["pair"] = pair_json(pair);
    add_witness(r, w);
  }

  if (samples == 0) samples = 200;
  const auto pairs = all_pairs(spec.dim());
  std::uniform_int_distribution<std::size_t> pick(0, apartment.size() - 1);
  const std::size_t max_size = std::min<std::size_t>(4, apartment.size());
  std::uniform_int_distribution<std::size_t> size_pick(1, max_size);
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t size = size_pick(rng);
    std::set<std::size_t> chosen;
    while (chosen.size() < size) chosen.insert(pick(rng));
    std::vector<LabeledPartition> subset;
    for (auto idx : chosen) subset.push_back(apartment[idx]);
    const auto fused = fused_pairs(subset);
    ++r.counters[fused.empty() ? "exact_samples" : "inexact_samples"];
    // An independent frame fits X exactly along its fused pairs.
    for (const auto& pair : pairs) {
      const bool fits = subset_fits_rotated_frame(spec, frame, subset, pair);
      const bool fused_here = std::binary_search(fused.begin(), fused.end(), pair);
      if (fits != fused_here) {
        Json w = Json::object();
        w["pair"] = pair_json(pair);
        w["subset"] = Json::array();
        for (const auto& p : subset) w["subset"].push_back(partition_to_json(p));
        fail(r, "embedding_mismatch", w);
      }
    }
  }
  return r;
}

using Bits = std::vector<std::uint64_t>;

Bits bits_and(const Bits& a, const Bits& b) {
  Bits out(a.size());
  for (std::size_t w = 0; w < a.size(); ++w) out[w] = a[w] & b[w];
  return out;
}

bool bits_subset(const Bits& a, const Bits& b) {
  for (std::size_t w = 0; w < a.size(); ++w)
    if ((a[w] & ~b[w]) != 0) return false;
  return true;
}

bool bits_empty(const Bits& a) {
  return std::all_of(a.begin(), a.end(), [](std::uint64_t w) { return w == 0; });
}

SuiteResult suite_ad(const ClassSpec& spec, std::uint64_t cap) {
  require(!spec.is_rank_one_projection_class(), "lemma 'ad' does not apply to lambda * P_1");
  int large = 0;
  for (int s = 0; s < spec.num_slots(); ++s) large += spec.slot_size(s) >= 2 ? 1 : 0;
  require(large >= 1, "lemma 'ad' needs an eigenspace of dimension at least 2");

  SuiteResult r;
  const auto apartment = enumerate_apartment(spec, cap);
  const auto pairs = all_pairs(spec.dim());
  const std::size_t words = (apartment.size() + 63) / 64;
  std::vector<Bits> members(pairs.size(), Bits(words, 0));
  for (std::size_t a = 0; a < pairs.size(); ++a)
    for (std::size_t x = 0; x < apartment.size(); ++x)
      if (in_a_ij(apartment[x], pairs[a])) members[a][x / 64] |= std::uint64_t{1} << (x % 64);

  std::vector<std::pair<std::size_t, std::size_t>> couples;
  std::vector<Bits> meets;
  for (std::size_t a = 0; a < pairs.size(); ++a)
    for (std::size_t b = a + 1; b < pairs.size(); ++b) {
      couples.emplace_back(a, b);
      meets.push_back(bits_and(members[a], members[b]));
    }

  auto witness = [&](std::size_t c) {
    Json w = Json::object();
    w["pairs"] = Json::array({pair_json(pairs[couples[c].first]), pair_json(pairs[couples[c].second])});
    return w;
  };

  if (large >= 2) {
    r.counters["regime_two_large_eigenspaces"] = 1;
    for (std::size_t c = 0; c < couples.size(); ++c) {
      const bool adj = adjacent(pairs[couples[c].first], pairs[couples[c].second]);
      ++r.counters[adj ? "adjacent_checked" : "disjoint_checked"];
      Json w = witness(c);
      if (bits_empty(meets[c])) {
        fail(r, adj ? "adjacent_intersection_empty" : "disjoint_intersection_empty", w);
        continue;
      }
      int containing = 0;
      for (const auto& m : members) containing += bits_subset(meets[c], m) ? 1 : 0;
      w["containing"] = containing;
      if (containing != (adj ? 3 : 2)) fail(r, adj ? "adjacent_count_mismatch" : "disjoint_count_mismatch", w);
    }
    return r;
  }

  // Only the kernel exceeds dimension 1: adjacency is read off as maximality
  // of the pairwise intersection.
  r.counters["regime_kernel_only"] = 1;
  for (std::size_t c = 0; c < couples.size(); ++c) {
    const bool adj = adjacent(pairs[couples[c].first], pairs[couples[c].second]);
    ++r.counters[adj ? "adjacent_checked" : "disjoint_checked"];
    const bool empty = bits_empty(meets[c]);
    if (!adj && spec.kernel_dim() == 3 && !empty) fail(r, "disjoint_intersection_nonempty", witness(c));
    if (!adj && empty) ++r.counters["disjoint_intersection_empty"];
    bool maximal = !empty;
    for (std::size_t d = 0; d < couples.size() && maximal; ++d)
      if (d != c && bits_subset(meets[c], meets[d]) && meets[c] != meets[d]) maximal = false;
    if (maximal != adj) fail(r, "maximality_mismatch", witness(c));
  }
  return r;
}

SuiteResult suite_pairs(const std::string& lemma, const ClassSpec& spec, std::mt19937_64& rng, std::size_t samples,
                        double tolerance, std::uint64_t cap) {
  require(spec.assumptions_hold(), "lemma '" + lemma + "' needs the standing assumptions");
  require(!spec.is_rank_one_projection_class(), "lemma '" + lemma + "' does not apply to lambda * P_1");
  require(lemma != "same-im" || !spec.is_scaled_projection_class(),
          "lemma 'same-im' needs two operators with one range, impossible for lambda * P_k");
  SuiteResult r;
  const auto apartment = enumerate_apartment(spec, cap);
  const Basis frame = Basis::standard(spec.dim());
  for (const auto& [x, y] : operator_pairs(apartment.size(), samples, rng)) {
    const auto& p = apartment[x];
    const auto& q = apartment[y];
    const PairCase kind = classify_pair(p, q);
    if (lemma == "orth" && kind != PairCase::Orthogonal) continue;
    if (lemma == "nonorth" && kind != PairCase::Case2) continue;
    if (lemma == "same-im" && kind != PairCase::Case3) continue;
    ++r.counters["pairs_checked"];
    ++r.counters[std::string("pairs_") + case_name(kind)];

    const PairFamily family = pair_family(spec, p, q);
    const StructuralReport detector = detect_orthogonality_structural(spec, p, q);
    const bool oracle = kind == PairCase::Orthogonal;
    const auto rp = p.support();
    const auto rq = q.support();
    const auto common_kernel = intersect(p.kernel(), q.kernel());

    auto with_detector = [&]() {
      Json w = pair_witness(p, q);
      w["detector"] = report_to_json(detector);
      return w;
    };

    if (lemma == "ortho-pres") {
      if (detector.verdict != oracle) fail(r, "detector_mismatch", with_detector());
      const bool numeric =
          is_orthogonal_numeric(build_operator(frame, p, spec), build_operator(frame, q, spec), tolerance);
      if (numeric != oracle) fail(r, "numeric_oracle_mismatch", pair_witness(p, q));
      continue;
    }
    if (detector.verdict != oracle) fail(r, "detector_mismatch", with_detector());

    if (lemma == "orth") {
      std::vector<PairIndex> expected;
      for (int a : rp)
        for (int b : rq) expected.push_back(PairIndex::make(a, b));
      std::sort(expected.begin(), expected.end());
      if (expected != family.pairs) fail(r, "family_mismatch", pair_witness(p, q));
      continue;
    }

    if (lemma == "nonorth") {
      const auto both = intersect(rp, rq);
      const auto only_p = difference(rp, rq);
      const auto only_q = difference(rq, rp);
      auto expect = [&](int a, int b, bool present, const char* what) {
        if (family.contains(PairIndex::make(a, b)) != present) {
          Json w = pair_witness(p, q);
          w["pair"] = pair_json(PairIndex::make(a, b));
          fail(r, what, w);
        }
      };
      for (int a : both)
        for (int b : common_kernel) expect(a, b, true, "missing_range_kernel_pair");
      for (int a : only_p)
        for (int b : only_q) expect(a, b, true, "missing_cross_pair");
      for (const auto* side : {&only_p, &only_q, &common_kernel})
        for (std::size_t s = 0; s < side->size(); ++s)
          for (std::size_t t = s + 1; t < side->size(); ++t) expect((*side)[s], (*side)[t], false, "unexpected_pair");
      continue;
    }

    // same-im
    for (int a : rp)
      for (int b : common_kernel)
        if (!family.contains(PairIndex::make(a, b))) {
          Json w = pair_witness(p, q);
          w["pair"] = pair_json(PairIndex::make(a, b));
          fail(r, "missing_range_kernel_pair", w);
        }
    bool inside = false;
    for (const auto& pair : family.pairs) inside = inside || (contains(rp, pair.i) && contains(rp, pair.j));
    if (!inside) fail(r, "no_pair_inside_range", pair_witness(p, q));
  }
  return r;
}

SuiteResult suite_charad(const ClassSpec& spec, std::mt19937_64& rng, std::size_t samples, std::uint64_t cap) {
  require(spec.dim() == 2 * spec.rank(), "lemma 'char-ad' needs dim H = 2k");
  require(spec.assumptions_hold(), "lemma 'char-ad' needs k >= 4");
  require(!spec.is_scaled_projection_class(), "lemma 'char-ad' does not apply to lambda * P_k");
  if (samples == 0) samples = 50;
  SuiteResult r;
  const int k = spec.rank();
  const int threshold = k + 1;
  r.counters["threshold"] = threshold;
  const auto apartment = enumerate_apartment(spec, cap);
  std::uniform_int_distribution<std::size_t> pick(0, apartment.size() - 1);

  for (const int meet : {k - 1, 1}) {
    const std::string tag = meet == k - 1 ? "near" : "far";
    std::size_t found = 0;
    for (std::size_t attempt = 0; found < samples && attempt < 10'000 * samples; ++attempt) {
      const auto& p = apartment[pick(rng)];
      const auto& q = apartment[pick(rng)];
      if (p == q || static_cast<int>(intersect(p.support(), q.support()).size()) != meet) continue;
      ++found;
      try {
        if (meet == k - 1) {
          const auto [rp, rq] = choose_representatives_for_charad(spec, p, q);
          const int count = count_large_special_subfamilies(pair_family(spec, rp, rq), threshold);
          if (count < 2) {
            Json w = pair_witness(rp, rq);
            w["large_subfamilies"] = count;
            fail(r, "near_pair_below_two", w);
          }
        } else {
          const int count = count_large_special_subfamilies(pair_family(spec, p, q), threshold);
          if (count > 1) {
            Json w = pair_witness(p, q);
            w["large_subfamilies"] = count;
            fail(r, "far_pair_above_one", w);
          }
        }
      } catch (const Error& e) {
        Json w = pair_witness(p, q);
        w["error"] = e.what();
        fail(r, "exceptions", w);
      }
    }
    r.counters[tag + "_pairs"] = static_cast<std::int64_t>(found);
    if (found < samples) fail(r, tag + "_pairs_unavailable", Json::object());
  }
  return r;
}

SuiteResult suite_alter(const ClassSpec& spec, std::mt19937_64& rng, std::size_t samples, std::uint64_t cap) {
  require(spec.dim() == 2 * spec.rank(), "lemma 'alter' needs dim H = 2k");
  if (samples == 0) samples = 50;
  SuiteResult r;
  const int k = spec.rank();
  const auto apartment = enumerate_apartment(spec, cap);

  auto expect_tag = [&](const PartitionMap& map, const std::string& want, const std::string& label) {
    const auto report = range_alternative_check(spec, map);
    ++r.counters["maps_checked"];
    if (report.tag != want) {
      Json w = report_to_json(report);
      w["map"] = label;
      w["expected"] = want;
      fail(r, "tag_mismatch", w);
    }
    return report;
  };
  expect_tag(identity_partition_map(spec), "identity-type", "identity");
  expect_tag(complement_partition_map(spec), "complement-type", "complement");
  for (const auto& gamma : symmetry_group(spec)) {
    PartitionMap map;
    for (const auto& p : apartment) map.emplace(p, apply_symmetry(spec, gamma, p));
    expect_tag(map, gamma(0) == 0 ? "identity-type" : "complement-type", "symmetry");
  }

  // Swapping one operator with its complement breaks the alternative.
  std::uniform_int_distribution<std::size_t> pick(0, apartment.size() - 1);
  const auto& chosen = apartment[pick(rng)];
  PartitionMap swapped = identity_partition_map(spec);
  const auto partner = complement_partition(spec, chosen);
  swapped[chosen] = partner;
  swapped[partner] = chosen;
  const auto mixed = expect_tag(swapped, "mixed", "single_swap");
  const bool has_witness = std::any_of(mixed.witnesses.begin(), mixed.witnesses.end(),
                                       [](const Witness& w) { return w.kind == "branch_mismatch"; });
  if (mixed.tag == "mixed" && !has_witness) fail(r, "mixed_without_witness", report_to_json(mixed));
  if (has_witness && mixed.counts.count("witness_large_subfamilies_before") != 0) {
    const auto before = mixed.counts.at("witness_large_subfamilies_before");
    const auto after = mixed.counts.at("witness_large_subfamilies_after_max");
    r.counters["witness_large_subfamilies_before"] = before;
    r.counters["witness_large_subfamilies_after_max"] = after;
    if (before < 2 || after > 1) fail(r, "witness_counts_not_separated", report_to_json(mixed));
  }

  // Range chains between sampled operators.
  for (std::size_t s = 0; s < samples; ++s) {
    const auto& p = apartment[pick(rng)];
    const auto& q = apartment[pick(rng)];
    const auto chain = range_chain(spec, p, q);
    ++r.counters["chains_checked"];
    r.counters["chain_steps"] += static_cast<std::int64_t>(chain.size() - 1);
    bool ok = chain.front() == p && chain.back() == q;
    for (std::size_t t = 0; t + 1 < chain.size() && ok; ++t) {
      validate_partition(spec, chain[t + 1]);
      ok = static_cast<int>(intersect(chain[t].support(), chain[t + 1].support()).size()) == k - 1;
    }
    if (!ok) fail(r, "bad_chain", pair_witness(p, q));
  }
  return r;
}

void emit(const Json& report, const std::string& path, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw Error(ErrorCode::Malformed, "cannot write " + path);
  file << text;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::CapExceeded: return kCapExceeded;
    case ErrorCode::NotBijective:
    case ErrorCode::NotCommutativityPreserving: return kHypothesisViolation;
    default: return kInputError;
  }
}

}  // namespace

std::uint64_t enumeration_cap() {
  const char* raw = std::getenv("APARTMENTLAB_CAP");
  if (raw == nullptr || *raw == '\0') return kDefaultEnumerationCap;
  try {
    std::size_t used = 0;
    const std::string text(raw);
    const auto value = std::stoull(text, &used);
    if (used != text.size() || value == 0) throw std::invalid_argument(text);
    return value;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::Malformed, std::string("APARTMENTLAB_CAP is not a positive integer: ") + raw);
  }
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[h & 0xf];
    h >>= 4;
  }
  return out;
}

SuiteResult verify_lemma(const std::string& lemma, const ClassSpec& spec, std::uint64_t seed, std::size_t samples,
                         double tolerance, std::uint64_t cap) {
  std::mt19937_64 rng(seed);
  if (lemma == "in") return suite_in(spec, rng, samples, cap);
  if (lemma == "ad") return suite_ad(spec, cap);
  if (lemma == "orth" || lemma == "nonorth" || lemma == "same-im" || lemma == "ortho-pres")
    return suite_pairs(lemma, spec, rng, samples, tolerance, cap);
  if (lemma == "char-ad") return suite_charad(spec, rng, samples, cap);
  if (lemma == "alter") return suite_alter(spec, rng, samples, cap);
  throw Error(ErrorCode::Malformed, "unknown lemma '" + lemma + "'");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Orthogonal apartments of conjugacy classes of self-adjoint operators", "apartmentlab"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_path;
  std::string lemma;
  std::string map_path;
  std::string delta_rule = "identity";
  std::uint64_t seed = 0;
  std::uint64_t basis_seed = 0;
  std::size_t samples = 0;
  double tolerance = tol::predicate;
  bool timing = false;
  bool antiunitary = false;
  bool stanza = false;
  int extra_apartments = 1;

  auto common = [&](CLI::App* sub, bool needs_spec) {
    auto* opt = sub->add_option("--spec", spec_path, "class spec JSON file");
    if (needs_spec) opt->required();
    sub->add_option("--seed", seed, "seed for every random choice");
    sub->add_option("--tol", tolerance, "numeric predicate tolerance, in [1e-14, 1e-4]");
    sub->add_option("--out", out_path, "write the report to this file");
    sub->add_flag("--timing", timing, "add wall time to the report");
  };

  auto* enumerate = app.add_subcommand("enumerate", "list every operator of one apartment");
  common(enumerate, true);

  auto* verify = app.add_subcommand("verify", "run the property suite for one lemma");
  common(verify, true);
  verify->add_option("--lemma", lemma, "in | ad | orth | nonorth | same-im | ortho-pres | char-ad | alter")
      ->required()
      ->check(CLI::IsMember({"in", "ad", "orth", "nonorth", "same-im", "ortho-pres", "char-ad", "alter"}));
  verify->add_option("--samples", samples, "sample size (0 selects the suite default)");

  auto* decompose = app.add_subcommand("decompose", "recover U, the antiunitary flag and delta_A from a map file");
  common(decompose, false);
  decompose->add_option("--map", map_path, "map definition JSON file")->required();

  auto* model = app.add_subcommand("model", "generate a map file f(A) = U delta_A(A) U^*");
  common(model, true);
  model->add_option("--delta-rule", delta_rule, "identity | constant:<p0,...> | random:<seed>");
  model->add_flag("--antiunitary", antiunitary, "use an antiunitary U");
  model->add_option("--basis-seed", basis_seed, "seed of the first apartment's frame (standard basis if absent)");
  model->add_option("--extra-apartments", extra_apartments, "additional Haar-random apartments")
      ->check(CLI::NonNegativeNumber);
  model->add_flag("--stanza", stanza, "write the generator stanza instead of explicit pairs");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  const auto started = std::chrono::steady_clock::now();
  Json report = Json::object();
  try {
    if (tolerance < 1e-14 || tolerance > 1e-4)
      throw Error(ErrorCode::Malformed, "--tol must lie in [1e-14, 1e-4]");
    const std::uint64_t cap = enumeration_cap();
    std::optional<ClassSpec> spec;
    if (!spec_path.empty()) spec = spec_from_json(read_json_file(spec_path));

    const std::string command = app.get_subcommands().front()->get_name();
    Json config = Json::object();
    config["command"] = command;
    if (spec) config["spec"] = spec_to_json(*spec);
    config["seed"] = seed;
    config["tol"] = tolerance;
    if (command == "verify") {
      config["lemma"] = lemma;
      config["samples"] = samples;
    }
    Json map_json;
    if (command == "decompose") {
      map_json = read_json_file(map_path);
      config["map_digest"] = fnv1a_hex(map_json.dump());
    }
    if (command == "model") {
      config["delta_rule"] = delta_rule;
      config["antiunitary"] = antiunitary;
      if (model->count("--basis-seed") > 0) config["basis_seed"] = basis_seed;
      config["extra_apartments"] = extra_apartments;
    }

    report["command"] = command;
    report["argv"] = args;
    report["config_hash"] = fnv1a_hex(config.dump());
    report["seed"] = seed;
    report["tolerance"] = tolerance;
    if (spec) report["spec"] = spec_to_json(*spec);
    if (spec && !spec->warnings().empty()) report["warnings"] = spec->warnings();

    int code = kPass;
    if (command == "enumerate") {
      Json listing = Json::array();
      std::uint64_t count = 0;
      for_each_partition(*spec, [&](const LabeledPartition& p) {
        listing.push_back(partition_to_json(p));
        ++count;
      }, cap);
      report["verdict"] = "pass";
      report["counters"] = {{"partitions", count}, {"apartment_size", apartment_size(*spec)}};
      report["partitions"] = std::move(listing);
    } else if (command == "verify") {
      report["lemma"] = lemma;
      const SuiteResult result = verify_lemma(lemma, *spec, seed, samples, tolerance, cap);
      report["verdict"] = result.pass ? "pass" : "fail";
      report["counters"] = Json::object();
      for (const auto& [k, v] : result.counters) report["counters"][k] = v;
      report["witnesses"] = result.witnesses;
      code = result.pass ? kPass : kFail;
    } else if (command == "decompose") {
      const MapDefinition def = map_from_json(map_json, spec);
      if (!spec) report["spec"] = spec_to_json(def.spec);
      DecomposeOptions options;
      options.predicate_tolerance = tolerance;
      options.seed = seed;
      const std::size_t count = def.map.size();
      report["counters"] = {{"operators", count}, {"pairs_checked", count * (count - 1) / 2}};
      try {
        const DecomposeOutcome outcome = decompose_map(def.spec, def.map, options);
        if (outcome.success()) {
          const Decomposition& d = *outcome.decomposition;
          report["verdict"] = "pass";
          report["decomposition"] = decomposition_to_json(d);
          if (def.generator) {
            const ModelMap truth = model_from_generator(def.spec, *def.generator);
            const auto deltas = realized_deltas(truth);
            std::int64_t matches = 0;
            for (std::size_t i = 0; i < d.operators.size() && i < deltas.size(); ++i)
              matches += d.operators[i].delta == deltas[i] ? 1 : 0;
            const double lines = eigenline_distance(d, truth.unitary(), truth.antiunitary());
            const bool flag_ok = d.flag_ambiguous || d.antiunitary == truth.antiunitary();
            Json check = Json::object();
            check["delta_matches"] = matches;
            check["flag_matches"] = flag_ok;
            check["eigenline_distance"] = lines;
            report["ground_truth"] = check;
            if (matches != static_cast<std::int64_t>(deltas.size()) || !flag_ok || lines >= tol::decomposition) {
              report["verdict"] = "fail";
              code = kFail;
            }
          }
        } else {
          report["verdict"] = "out-of-form";
          report["failure"] = outcome.failure;
          if (outcome.first_unmatched) report["first_unmatched"] = *outcome.first_unmatched;
          code = kFail;
        }
      } catch (const MapHypothesisError& e) {
        report["verdict"] = "hypothesis-violation";
        Json w = Json::object();
        w["kind"] = std::string(code_name(e.code()));
        w["first"] = e.witness().first;
        w["second"] = e.witness().second;
        w["input_measure"] = e.witness().input_norm;
        w["output_measure"] = e.witness().output_norm;
        w["message"] = e.what();
        report["witnesses"] = Json::array({w});
        code = kHypothesisViolation;
      }
    } else {
      if (out_path.empty()) throw Error(ErrorCode::Malformed, "model needs --out for the map file");
      MapGenerator g;
      g.unitary_seed = seed;
      g.antiunitary = antiunitary;
      g.delta_rule = delta_rule;
      if (model->count("--basis-seed") > 0) g.basis_seed = basis_seed;
      g.extra_apartments = extra_apartments;
      const ModelMap m = model_from_generator(*spec, g);
      Json file = Json::object();
      if (stanza) {
        file["spec"] = spec_to_json(*spec);
      } else {
        file = map_to_json(*spec, realize(m));
      }
      file["generator"] = generator_to_json(g);
      emit(file, out_path, out);
      report["verdict"] = "pass";
      report["generator"] = generator_to_json(g);
      report["map_file"] = out_path;
      report["counters"] = {{"apartments", m.domain().size()},
                            {"operators", m.domain().size() * apartment_size(*spec)}};
      out_path.clear();
    }
    if (timing)
      report["wall_time_s"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    emit(report, out_path, out);
    return code;
  } catch (const Error& e) {
    err << "error [" << code_name(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace apartmentlab::cli
