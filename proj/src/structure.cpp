#include "apartmentlab/structure.hpp"

#include <algorithm>
#include <set>

#include "apartmentlab/error.hpp"

namespace apartmentlab {

namespace {

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

void require_half_dim(const ClassSpec& spec) {
  if (spec.dim() != 2 * spec.rank())
    throw Error(ErrorCode::PreconditionViolated, "operation requires dim H = 2k");
}

// Max over all relabelings with the same supports of the large-subfamily count.
int max_large_count_over_relabelings(const ClassSpec& spec, const LabeledPartition& p,
                                     const LabeledPartition& q, int threshold) {
  int best = 0;
  for (const auto& pp : same_support_relabelings(spec, p))
    for (const auto& qq : same_support_relabelings(spec, q))
      best = std::max(best, count_large_special_subfamilies(pair_family(spec, pp, qq), threshold));
  return best;
}

}  // namespace

StructuralReport detect_orthogonality_structural(const ClassSpec& spec, const LabeledPartition& p,
                                                 const LabeledPartition& q) {
  if (!spec.assumptions_hold())
    throw Error(ErrorCode::PreconditionViolated, "detector requires the standing assumptions");
  if (spec.is_rank_one_projection_class())
    throw Error(ErrorCode::PreconditionViolated, "detector does not apply to lambda * P_1");
  validate_partition(spec, p);
  validate_partition(spec, q);
  if (p == q) throw Error(ErrorCode::EqualPairs, "detector needs distinct operators");

  const PairFamily family = pair_family(spec, p, q);
  const auto& f = family.pairs;
  StructuralReport report;
  report.counts["family_size"] = family.size();

  std::int64_t non_adjacent = 0;
  std::int64_t clause_a_violations = 0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    for (std::size_t y = x + 1; y < f.size(); ++y) {
      if (adjacent(f[x], f[y])) continue;
      ++non_adjacent;
      std::vector<PairIndex> common;
      for (std::size_t z = 0; z < f.size(); ++z) {
        if (z == x || z == y) continue;
        if (adjacent(f[z], f[x]) && adjacent(f[z], f[y])) common.push_back(f[z]);
      }
      const bool ok = common.size() == 2 && !adjacent(common[0], common[1]);
      if (ok) continue;
      if (clause_a_violations++ == 0) {
        Witness w{"common_neighbours", {f[x], f[y]}, {}, {}, {}};
        w.pairs.insert(w.pairs.end(), common.begin(), common.end());
        w.note = common.size() == 2 ? "the two common neighbours are adjacent"
                                    : std::to_string(common.size()) + " common neighbours";
        report.witnesses.push_back(std::move(w));
      }
    }
  }
  report.counts["non_adjacent_pairs"] = non_adjacent;
  report.counts["clause_a_violations"] = clause_a_violations;

  const auto subfamilies = special_subfamilies(family);
  report.counts["special_subfamilies"] = static_cast<std::int64_t>(subfamilies.size());
  std::int64_t clause_b_violations = 0;
  for (std::size_t a = 0; a < subfamilies.size(); ++a)
    for (std::size_t b = a + 1; b < subfamilies.size(); ++b) {
      const int shared = intersection_size(subfamilies[a], subfamilies[b]);
      if (shared <= 1) continue;
      if (clause_b_violations++ == 0)
        report.witnesses.push_back({"subfamily_intersection", {}, {}, {subfamilies[a], subfamilies[b]},
                                    std::to_string(shared) + " shared members"});
    }
  report.counts["clause_b_violations"] = clause_b_violations;

  // The case-2 argument needs a common kernel vector; it always exists under
  // the standing assumptions, but a counterexample is surfaced if not.
  const auto kernel_common = intersect(p.kernel(), q.kernel());
  const auto support_common = intersect(p.support(), q.support());
  if (!support_common.empty() && p.support() != q.support() && kernel_common.empty())
    report.witnesses.push_back({"trivial_kernel_intersection", {}, {p, q}, {},
                                "case-2 pair without a common kernel vector"});

  report.verdict = clause_a_violations == 0 && clause_b_violations == 0;
  report.tag = report.verdict ? "orthogonal" : "non-orthogonal";
  return report;
}

int count_large_special_subfamilies(const PairFamily& family, int threshold) {
  const auto subfamilies = special_subfamilies(family);
  return static_cast<int>(std::count_if(subfamilies.begin(), subfamilies.end(),
                                        [&](const SpecialSubfamily& s) { return s.size() >= threshold; }));
}

std::vector<LabeledPartition> same_support_relabelings(const ClassSpec& spec, const LabeledPartition& p) {
  validate_partition(spec, p);
  const auto support = p.support();
  std::vector<int> labels;
  for (int b : support) labels.push_back(p.slot_of[static_cast<std::size_t>(b)]);
  std::sort(labels.begin(), labels.end());
  std::vector<LabeledPartition> out;
  do {
    LabeledPartition r = p;
    for (std::size_t t = 0; t < support.size(); ++t) r.slot_of[static_cast<std::size_t>(support[t])] = labels[t];
    out.push_back(std::move(r));
  } while (std::next_permutation(labels.begin(), labels.end()));
  std::sort(out.begin(), out.end());
  return out;
}

std::pair<LabeledPartition, LabeledPartition> choose_representatives_for_charad(const ClassSpec& spec,
                                                                                const LabeledPartition& p,
                                                                                const LabeledPartition& q) {
  require_half_dim(spec);
  validate_partition(spec, p);
  validate_partition(spec, q);
  const int k = spec.rank();
  if (static_cast<int>(intersect(p.support(), q.support()).size()) != k - 1)
    throw Error(ErrorCode::PreconditionViolated, "supports must meet in k - 1 indices");

  const auto& mult = spec.multiplicities();
  if (std::all_of(mult.begin(), mult.end(), [](int n) { return n == 1; })) return {p, q};
  if (spec.is_scaled_projection_class())
    throw Error(ErrorCode::PreconditionViolated, "no nonzero eigenspace fits inside the common range");

  auto shares_eigenspace = [&](const LabeledPartition& a, const LabeledPartition& b) {
    for (int s = 1; s < spec.num_slots(); ++s) {
      if (spec.slot_size(s) < 2) continue;
      const auto block = a.block(s);
      for (int t = 1; t < spec.num_slots(); ++t)
        if (b.block(t) == block) return true;
    }
    return false;
  };
  const auto ps = same_support_relabelings(spec, p);
  const auto qs = same_support_relabelings(spec, q);
  for (const auto& pp : ps)
    for (const auto& qq : qs)
      if (shares_eigenspace(pp, qq)) return {pp, qq};
  throw Error(ErrorCode::PreconditionViolated, "no representatives with a common eigenspace");
}

std::vector<LabeledPartition> range_chain(const ClassSpec& spec, const LabeledPartition& p,
                                          const LabeledPartition& q) {
  validate_partition(spec, p);
  validate_partition(spec, q);
  std::vector<LabeledPartition> chain{p};
  LabeledPartition cur = p;
  const auto target = q.support();

  // Single-index swaps toward the target support, preferring to hand over a
  // slot that already matches the target label.
  while (cur.support() != target) {
    const auto outgoing = difference(cur.support(), target);
    const auto incoming = difference(target, cur.support());
    const int t = incoming.front();
    int s = outgoing.front();
    for (int cand : outgoing)
      if (cur.slot_of[static_cast<std::size_t>(cand)] == q.slot_of[static_cast<std::size_t>(t)]) {
        s = cand;
        break;
      }
    LabeledPartition next = cur;
    next.slot_of[static_cast<std::size_t>(t)] = cur.slot_of[static_cast<std::size_t>(s)];
    next.slot_of[static_cast<std::size_t>(s)] = 0;
    chain.push_back(next);
    cur = std::move(next);
  }

  // Label transpositions a <-> b routed through an index z outside the
  // support: z takes a's label, a takes b's, b takes z's.
  const int n = spec.dim();
  int z = -1;
  for (int b = 0; b < n; ++b)
    if (!std::binary_search(target.begin(), target.end(), b)) {
      z = b;
      break;
    }
  for (int a : target) {
    const int want = q.slot_of[static_cast<std::size_t>(a)];
    if (cur.slot_of[static_cast<std::size_t>(a)] == want) continue;
    if (z < 0) throw Error(ErrorCode::PreconditionViolated, "no index outside the support for relabeling");
    int b = -1;
    for (int c : target)
      if (c != a && cur.slot_of[static_cast<std::size_t>(c)] == want &&
          cur.slot_of[static_cast<std::size_t>(c)] != q.slot_of[static_cast<std::size_t>(c)]) {
        b = c;
        break;
      }
    const int label_a = cur.slot_of[static_cast<std::size_t>(a)];
    const int label_b = cur.slot_of[static_cast<std::size_t>(b)];
    LabeledPartition step1 = cur;
    step1.slot_of[static_cast<std::size_t>(z)] = label_a;
    step1.slot_of[static_cast<std::size_t>(a)] = 0;
    LabeledPartition step2 = step1;
    step2.slot_of[static_cast<std::size_t>(a)] = label_b;
    step2.slot_of[static_cast<std::size_t>(b)] = 0;
    LabeledPartition step3 = step2;
    step3.slot_of[static_cast<std::size_t>(b)] = label_a;
    step3.slot_of[static_cast<std::size_t>(z)] = 0;
    chain.push_back(step1);
    chain.push_back(step2);
    chain.push_back(step3);
    cur = std::move(step3);
  }
  return chain;
}

LabeledPartition complement_partition(const ClassSpec& spec, const LabeledPartition& p) {
  require_half_dim(spec);
  validate_partition(spec, p);
  const auto support = p.support();
  const auto kernel = p.kernel();
  LabeledPartition out;
  out.slot_of.assign(p.slot_of.size(), 0);
  for (std::size_t r = 0; r < kernel.size(); ++r)
    out.slot_of[static_cast<std::size_t>(kernel[r])] = p.slot_of[static_cast<std::size_t>(support[r])];
  return out;
}

PartitionMap identity_partition_map(const ClassSpec& spec) {
  PartitionMap map;
  for_each_partition(spec, [&](const LabeledPartition& p) { map.emplace(p, p); });
  return map;
}

PartitionMap complement_partition_map(const ClassSpec& spec) {
  PartitionMap map;
  for_each_partition(spec, [&](const LabeledPartition& p) { map.emplace(p, complement_partition(spec, p)); });
  return map;
}

StructuralReport range_alternative_check(const ClassSpec& spec, const PartitionMap& map) {
  require_half_dim(spec);
  const auto apartment = enumerate_apartment(spec);
  if (map.size() != apartment.size())
    throw Error(ErrorCode::NotApartmentPreserving, "map is not defined on the whole apartment");
  std::set<LabeledPartition> images;
  for (const auto& p : apartment) {
    const auto it = map.find(p);
    if (it == map.end()) throw Error(ErrorCode::NotApartmentPreserving, "map misses an operator");
    try {
      validate_partition(spec, it->second);
    } catch (const Error&) {
      throw Error(ErrorCode::NotApartmentPreserving, "image is not an operator of the apartment");
    }
    images.insert(it->second);
  }
  if (images.size() != apartment.size())
    throw Error(ErrorCode::NotApartmentPreserving, "map is not injective on the apartment");

  enum class Branch { Same, Complement, Neither };
  std::map<LabeledPartition, Branch> branch;
  std::int64_t same = 0;
  std::int64_t complemented = 0;
  std::int64_t neither = 0;
  StructuralReport report;
  for (const auto& p : apartment) {
    const auto image_support = map.at(p).support();
    if (image_support == p.support()) {
      branch[p] = Branch::Same;
      ++same;
    } else if (image_support == p.kernel()) {
      branch[p] = Branch::Complement;
      ++complemented;
    } else {
      branch[p] = Branch::Neither;
      if (neither++ == 0)
        report.witnesses.push_back({"support_neither_kept_nor_complemented", {}, {p, map.at(p)}, {}, {}});
    }
  }
  report.counts["same_support"] = same;
  report.counts["complemented_support"] = complemented;
  report.counts["other_support"] = neither;

  const auto total = static_cast<std::int64_t>(apartment.size());
  if (same == total) {
    report.verdict = true;
    report.tag = "identity-type";
    return report;
  }
  if (complemented == total) {
    report.verdict = true;
    report.tag = "complement-type";
    return report;
  }
  report.verdict = false;
  report.tag = "mixed";

  const int k = spec.rank();
  for (const auto& a : apartment) {
    if (branch[a] != Branch::Complement) continue;
    for (const auto& b : apartment) {
      if (branch[b] != Branch::Same) continue;
      if (static_cast<int>(intersect(a.support(), b.support()).size()) != k - 1) continue;
      const LabeledPartition& ga = map.at(a);
      const LabeledPartition& gb = map.at(b);
      Witness w{"branch_mismatch", {}, {a, b, ga, gb}, {}, {}};
      report.counts["witness_support_intersection_before"] = k - 1;
      report.counts["witness_support_intersection_after"] =
          static_cast<std::int64_t>(intersect(ga.support(), gb.support()).size());
      if (!spec.is_scaled_projection_class() && k >= 4) {
        const auto [ra, rb] = choose_representatives_for_charad(spec, a, b);
        report.counts["witness_large_subfamilies_before"] =
            count_large_special_subfamilies(pair_family(spec, ra, rb), k + 1);
        report.counts["witness_large_subfamilies_after_max"] =
            max_large_count_over_relabelings(spec, ga, gb, k + 1);
        w.note = "large special subfamily counts differ across the map";
      }
      report.witnesses.push_back(std::move(w));
      return report;
    }
  }
  return report;
}

}  // namespace apartmentlab
