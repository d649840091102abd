#include "apartmentlab/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace apartmentlab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<int> support_intersection(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Vector apply_semilinear(const Basis& u, bool antiunitary, const Vector& v) {
  return antiunitary ? Vector(u.columns() * v.conjugate()) : Vector(u.columns() * v);
}

// Commutator of Hermitian A, B from one product: AB - BA = AB - (AB)^*.
double hermitian_commutator_norm(const Matrix& a, const Matrix& b, Matrix& scratch) {
  scratch.noalias() = a * b;
  return std::sqrt((scratch - scratch.adjoint()).cwiseAbs2().maxCoeff());
}

double max_distance(const Matrix& a, const Matrix& b) { return std::sqrt((a - b).cwiseAbs2().maxCoeff()); }

struct GroupData {
  std::vector<std::size_t> members;
  Basis source{Matrix::Identity(1, 1)};
  std::vector<LabeledPartition> partitions;
  Matrix targets;  // column b spans the image line of source column b
};

struct Attempt {
  bool ok = false;
  Decomposition decomposition;
  double worst = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> first_unmatched;
};

}  // namespace

DeltaRule DeltaRule::parse(const std::string& text) {
  if (text == "identity") return identity();
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::Malformed, "unknown delta rule '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string arg = text.substr(colon + 1);
  try {
    if (kind == "random") {
      std::size_t used = 0;
      const auto seed = std::stoull(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
      return random(seed);
    }
    if (kind == "constant") {
      SymmetryPerm perm;
      std::stringstream in(arg);
      std::string item;
      while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        perm.mapping.push_back(std::stoi(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      }
      if (perm.mapping.empty()) throw std::invalid_argument(arg);
      return constant(std::move(perm));
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::Malformed, "bad argument in delta rule '" + text + "'");
  }
  throw Error(ErrorCode::Malformed, "unknown delta rule '" + text + "'");
}

std::string DeltaRule::to_string() const {
  switch (kind_) {
    case Kind::Identity: return "identity";
    case Kind::Random: return "random:" + std::to_string(seed_);
    case Kind::Constant: {
      std::string out = "constant:";
      for (std::size_t i = 0; i < perm_.mapping.size(); ++i) {
        if (i > 0) out += ',';
        out += std::to_string(perm_.mapping[i]);
      }
      return out;
    }
  }
  return "identity";
}

SymmetryPerm DeltaRule::at(const ClassSpec& spec, int apartment, const LabeledPartition& p) const {
  switch (kind_) {
    case Kind::Identity: return SymmetryPerm::identity(spec.num_slots());
    case Kind::Constant: return perm_;
    case Kind::Random: {
      const auto group = symmetry_group(spec);
      std::vector<LabeledPartition> orbit;
      for (const auto& gamma : group) orbit.push_back(apply_symmetry(spec, gamma, p));
      std::sort(orbit.begin(), orbit.end());
      orbit.erase(std::unique(orbit.begin(), orbit.end()), orbit.end());
      std::uint64_t h = splitmix64(seed_);
      h = splitmix64(h ^ static_cast<std::uint64_t>(apartment));
      h = splitmix64(h ^ partition_rank(spec, orbit.front()));
      // Fisher-Yates with the hash chain, so the orbit shuffle is the same on
      // every platform.
      std::vector<std::size_t> order(orbit.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      for (std::size_t i = order.size(); i > 1; --i) {
        h = splitmix64(h);
        std::swap(order[i - 1], order[static_cast<std::size_t>(h % i)]);
      }
      const auto pos = static_cast<std::size_t>(std::lower_bound(orbit.begin(), orbit.end(), p) - orbit.begin());
      const LabeledPartition& target = orbit[order[pos]];
      for (const auto& gamma : group)
        if (apply_symmetry(spec, gamma, p) == target) return gamma;
      break;
    }
  }
  return SymmetryPerm::identity(spec.num_slots());
}

SymmetryPerm canonical_delta(const ClassSpec& spec, const SymmetryPerm& delta, const LabeledPartition& p) {
  const LabeledPartition image = apply_symmetry(spec, delta, p);
  for (const auto& gamma : symmetry_group(spec))
    if (apply_symmetry(spec, gamma, p) == image) return gamma;
  return delta;
}

SymmetryPerm ModelMap::delta(int apartment, const LabeledPartition& p) const {
  return canonical_delta(spec_, rule_.at(spec_, apartment, p), p);
}

HermitianOperator ModelMap::input(int apartment, const LabeledPartition& p) const {
  return build_operator(domain_.at(static_cast<std::size_t>(apartment)), p, spec_);
}

HermitianOperator ModelMap::apply(int apartment, const LabeledPartition& p) const {
  const LabeledPartition image = apply_symmetry(spec_, delta(apartment, p), p);
  return conjugate(build_operator(domain_.at(static_cast<std::size_t>(apartment)), image, spec_), unitary_,
                   antiunitary_);
}

ModelMap make_model_map(const ClassSpec& spec, Basis unitary, bool antiunitary, DeltaRule rule,
                        std::vector<Basis> domain) {
  if (unitary.dim() != spec.dim()) throw Error(ErrorCode::DimensionMismatch, "unitary has the wrong size");
  if (domain.empty()) throw Error(ErrorCode::DomainIncomplete, "model map needs at least one apartment");
  for (const auto& b : domain)
    if (b.dim() != spec.dim()) throw Error(ErrorCode::DimensionMismatch, "domain basis has the wrong size");
  if (rule.kind() == DeltaRule::Kind::Constant) {
    const auto perm = rule.at(spec, 0, LabeledPartition{});
    if (!preserves_multiplicities(spec, perm))
      throw Error(ErrorCode::InvalidPermutation, "constant delta is not in S(C)");
  }
  return ModelMap(spec, std::move(unitary), antiunitary, std::move(rule), std::move(domain));
}

double equivariance_defect(const ClassSpec& spec, const Basis& u, bool antiunitary, const HermitianOperator& a) {
  double worst = 0.0;
  const HermitianOperator image = conjugate(a, u, antiunitary);
  for (const auto& delta : symmetry_group(spec)) {
    const auto lhs = conjugate(apply_symmetry_operator(spec, delta, a), u, antiunitary);
    const auto rhs = apply_symmetry_operator(spec, delta, image);
    worst = std::max(worst, max_norm(lhs.matrix() - rhs.matrix()));
  }
  return worst;
}

OperatorMap realize(const ModelMap& map) {
  OperatorMap out;
  for (int g = 0; g < static_cast<int>(map.domain().size()); ++g)
    for_each_partition(map.spec(), [&](const LabeledPartition& p) {
      out.push_back({map.input(g, p), map.apply(g, p)});
    });
  return out;
}

std::vector<SymmetryPerm> realized_deltas(const ModelMap& map) {
  std::vector<SymmetryPerm> out;
  for (int g = 0; g < static_cast<int>(map.domain().size()); ++g)
    for_each_partition(map.spec(), [&](const LabeledPartition& p) { out.push_back(map.delta(g, p)); });
  return out;
}

std::vector<IndexPair> all_index_pairs(std::size_t count) {
  std::vector<IndexPair> out;
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = i + 1; j < count; ++j) out.emplace_back(i, j);
  return out;
}

std::vector<IndexPair> sample_index_pairs(std::size_t count, std::size_t samples, std::uint64_t seed) {
  const std::size_t total = count < 2 ? 0 : count * (count - 1) / 2;
  if (samples >= total) return all_index_pairs(count);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, count - 1);
  std::set<IndexPair> chosen;
  while (chosen.size() < samples) {
    std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    chosen.emplace(a, b);
  }
  return {chosen.begin(), chosen.end()};
}

CommutativityReport check_commutativity_preserving(const OperatorMap& map, std::span<const IndexPair> pairs,
                                                   double tolerance) {
  CommutativityReport report;
  Matrix scratch;
  for (const auto& [i, j] : pairs) {
    const auto& a = map.at(i);
    const auto& b = map.at(j);
    const double in = hermitian_commutator_norm(a.input.matrix(), b.input.matrix(), scratch);
    const double out = hermitian_commutator_norm(a.output.matrix(), b.output.matrix(), scratch);
    ++report.checked;
    if ((in <= tolerance) != (out <= tolerance)) report.violations.push_back({i, j, in, out});
  }
  return report;
}

std::vector<LabeledPartition> biorthogonal_closure(const LabeledPartition& a,
                                                   std::span<const LabeledPartition> family) {
  const auto support = a.support();
  auto orthogonal = [](const std::vector<int>& x, const std::vector<int>& y) {
    return support_intersection(x, y).empty();
  };
  for (const auto& b : family)
    if (b.dim() != a.dim()) throw Error(ErrorCode::DimensionMismatch, "family mixes dimensions");

  std::vector<std::vector<int>> perp;
  for (const auto& b : family) {
    auto sb = b.support();
    if (orthogonal(support, sb)) perp.push_back(std::move(sb));
  }
  std::vector<LabeledPartition> closure;
  std::vector<LabeledPartition> direct;
  for (const auto& c : family) {
    const auto sc = c.support();
    const bool in_closure =
        std::all_of(perp.begin(), perp.end(), [&](const std::vector<int>& sb) { return orthogonal(sc, sb); });
    if (in_closure) closure.push_back(c);
    if (sc == support) direct.push_back(c);
  }
  std::sort(closure.begin(), closure.end());
  std::sort(direct.begin(), direct.end());
  if (closure != direct)
    throw Error(ErrorCode::ClosureDisagreement, "double orthocomplement differs from the same-support set (" +
                                                    std::to_string(closure.size()) + " vs " +
                                                    std::to_string(direct.size()) + " operators)");
  return closure;
}

std::vector<SupportImage> induced_grassmann_map(const ClassSpec& spec, const Basis& basis, const OperatorMap& map,
                                                double tolerance) {
  std::map<std::vector<int>, Subspace> images;
  for (const auto& entry : map) {
    const auto p = recover_partition(entry.input, basis, spec);
    Subspace range = range_subspace(entry.output);
    const auto key = p.support();
    const auto found = images.find(key);
    if (found == images.end()) {
      images.emplace(key, std::move(range));
    } else if (max_norm(found->second.projector() - range.projector()) > tolerance) {
      throw Error(ErrorCode::IllDefinedMap, "operators with equal range have images with different ranges");
    }
  }
  std::vector<SupportImage> out;
  for (auto& [support, range] : images) out.push_back({support, range});
  return out;
}

std::map<std::vector<int>, std::vector<int>> induced_grassmann_map(const PartitionMap& map) {
  std::map<std::vector<int>, std::vector<int>> out;
  for (const auto& [p, q] : map) {
    const auto [it, inserted] = out.emplace(p.support(), q.support());
    if (!inserted && it->second != q.support())
      throw Error(ErrorCode::IllDefinedMap, "operators with equal support map to different supports");
  }
  return out;
}

std::optional<std::vector<int>> aligned_indices(const Subspace& space, const Basis& basis, double tolerance) {
  if (space.ambient_dim() != basis.dim()) throw Error(ErrorCode::DimensionMismatch, "subspace and basis differ");
  std::vector<int> out;
  const Matrix overlap = space.generators().adjoint() * basis.columns();
  for (int b = 0; b < basis.dim(); ++b) {
    const double weight = overlap.col(b).squaredNorm();
    if (std::abs(weight - 1.0) <= tolerance) {
      out.push_back(b);
    } else if (weight > tolerance) {
      return std::nullopt;
    }
  }
  if (static_cast<int>(out.size()) != space.dim()) return std::nullopt;
  return out;
}

double phase_aligned_distance(const Matrix& a, const Matrix& b) {
  const Complex overlap = (b.adjoint() * a).trace();
  const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0, 0.0);
  return max_norm(a - phase * b);
}

double eigenline_distance(const Decomposition& decomposition, const Basis& reference, bool reference_antiunitary) {
  double worst = 0.0;
  for (const auto& basis : decomposition.apartment_bases)
    for (int b = 0; b < basis.dim(); ++b) {
      const Vector w = basis.column(b);
      worst = std::max(worst, line_distance(apply_semilinear(decomposition.unitary, decomposition.antiunitary, w),
                                            apply_semilinear(reference, reference_antiunitary, w)));
    }
  return worst;
}

namespace {

// Phases phi with U = T_0 diag(phi) S_0^* sending every source line of every
// other apartment to its target line. Returns phi and whether it is unique.
std::pair<Vector, bool> solve_line_phases(const std::vector<GroupData>& groups, bool antiunitary) {
  const auto& ref = groups.front();
  const Eigen::Index n = ref.targets.rows();
  auto source = [&](const GroupData& g) -> Matrix {
    return antiunitary ? Matrix(g.source.columns().conjugate()) : g.source.columns();
  };
  if (groups.size() == 1) return {Vector::Ones(n), false};

  const Matrix s0_adj = source(ref).adjoint();
  Matrix normal = Matrix::Zero(n, n);
  for (std::size_t g = 1; g < groups.size(); ++g) {
    const Matrix s = source(groups[g]);
    for (Eigen::Index b = 0; b < n; ++b) {
      const Vector m = s0_adj * s.col(b);
      const Vector t = groups[g].targets.col(b);
      const Matrix reject = Matrix::Identity(n, n) - t * t.adjoint();
      const Matrix block = reject * ref.targets * m.asDiagonal();
      normal += block.adjoint() * block;
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(normal);
  const Eigen::VectorXd& values = solver.eigenvalues();
  const double scale = std::max(1.0, values.maxCoeff());
  Eigen::Index nullity = 0;
  while (nullity < n && values(nullity) <= 1e-9 * scale) ++nullity;
  Vector phi;
  if (nullity <= 1) {
    phi = solver.eigenvectors().col(0);
  } else {
    const Matrix null = solver.eigenvectors().leftCols(nullity);
    phi = null * (null.adjoint() * Vector::Ones(n));
  }
  for (Eigen::Index b = 0; b < n; ++b) {
    const double r = std::abs(phi(b));
    phi(b) = r > 1e-12 ? phi(b) / r : Complex(1.0, 0.0);
  }
  const Complex anchor = phi(0);
  phi *= std::conj(anchor);
  return {phi, nullity == 1};
}

Attempt try_flag(const ClassSpec& spec, const OperatorMap& map, const std::vector<GroupData>& groups,
                 const std::vector<int>& group_of, const std::vector<std::size_t>& index_in_group, bool antiunitary,
                 const DecomposeOptions& options) {
  Attempt attempt;
  const auto [phi, unique] = solve_line_phases(groups, antiunitary);
  const Matrix s0 = antiunitary ? Matrix(groups.front().source.columns().conjugate())
                                : groups.front().source.columns();
  Matrix u = groups.front().targets * phi.asDiagonal() * s0.adjoint();
  // Re-orthonormalize against rounding drift before wrapping as a Basis.
  Eigen::HouseholderQR<Matrix> qr(u);
  Matrix q = qr.householderQ() * Matrix::Identity(u.rows(), u.cols());
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    const Complex d = r(c, c);
    if (std::abs(d) > 0.0) q.col(c) *= d / std::abs(d);
  }
  const Basis unitary(std::move(q));

  const auto group = symmetry_group(spec);
  Decomposition& dec = attempt.decomposition;
  dec.unitary = unitary;
  dec.antiunitary = antiunitary;
  dec.phases_fixed = unique;
  for (const auto& g : groups) dec.apartment_bases.push_back(g.source);
  attempt.worst = 0.0;

  for (std::size_t i = 0; i < map.size(); ++i) {
    const auto& g = groups[static_cast<std::size_t>(group_of[i])];
    const LabeledPartition& p = g.partitions[index_in_group[i]];
    // g(A) = U^* f(A) U, conjugated for an antiunitary U, should be delta(A).
    Matrix pulled = unitary.columns().adjoint() * map[i].output.matrix() * unitary.columns();
    if (antiunitary) pulled = pulled.conjugate().eval();
    const Matrix local = g.source.columns().adjoint() * pulled * g.source.columns();
    double off = 0.0;
    for (Eigen::Index r2 = 0; r2 < local.rows(); ++r2)
      for (Eigen::Index c = 0; c < local.cols(); ++c)
        if (r2 != c) off = std::max(off, std::abs(local(r2, c)));

    OperatorDecomposition op;
    op.apartment = group_of[i];
    op.partition = p;
    // S(C) is sorted, so the first delta within tolerance is the
    // lexicographically smallest match.
    double best = std::numeric_limits<double>::infinity();
    int hits = 0;
    for (const auto& delta : group) {
      const LabeledPartition image = apply_symmetry(spec, delta, p);
      double diag = 0.0;
      for (int b = 0; b < p.dim(); ++b)
        diag = std::max(diag, std::abs(local(b, b) - spec.slot_value(image.slot_of[static_cast<std::size_t>(b)])));
      const double score = std::max(off, diag);
      if (score <= options.residual_tolerance && hits++ == 0) {
        best = score;
        op.delta = delta;
      } else if (hits == 0 && score < best) {
        best = score;
        op.delta = delta;
      }
    }
    op.ambiguous = hits > 1;
    const auto expected = conjugate(build_operator(g.source, apply_symmetry(spec, op.delta, p), spec), unitary,
                                    antiunitary);
    op.residual = max_norm(map[i].output.matrix() - expected.matrix());
    if (op.residual > options.residual_tolerance && !attempt.first_unmatched) attempt.first_unmatched = i;
    attempt.worst = std::max(attempt.worst, op.residual);
    dec.operators.push_back(std::move(op));
  }
  dec.residual = attempt.worst;
  attempt.ok = attempt.worst <= options.residual_tolerance;
  return attempt;
}

}  // namespace

DecomposeOutcome decompose_map(const ClassSpec& spec, const OperatorMap& map, const DecomposeOptions& options) {
  const std::size_t count = map.size();
  if (count == 0) throw Error(ErrorCode::DomainIncomplete, "the map has no entries");
  const double ptol = options.predicate_tolerance;
  for (const auto& entry : map) {
    if (entry.input.dim() != spec.dim() || entry.output.dim() != spec.dim())
      throw Error(ErrorCode::DimensionMismatch, "map entry has the wrong dimension");
    slot_eigenspaces(entry.input, spec);
    slot_eigenspaces(entry.output, spec);
  }

  // Bijectivity and commutativity preservation over every pair.
  std::vector<char> commutes(count * count, 1);
  Matrix scratch(spec.dim(), spec.dim());
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = i + 1; j < count; ++j) {
      const Matrix& ai = map[i].input.matrix();
      const Matrix& aj = map[j].input.matrix();
      const Matrix& fi = map[i].output.matrix();
      const Matrix& fj = map[j].output.matrix();
      const double in_gap = max_distance(ai, aj);
      const double out_gap = max_distance(fi, fj);
      if (in_gap <= ptol)
        throw Error(ErrorCode::Malformed, "inputs " + std::to_string(i) + " and " + std::to_string(j) +
                                              " coincide");
      if (out_gap <= ptol)
        throw MapHypothesisError(ErrorCode::NotBijective,
                                 "inputs " + std::to_string(i) + " and " + std::to_string(j) + " share an image",
                                 {i, j, in_gap, out_gap});
      const double in = hermitian_commutator_norm(ai, aj, scratch);
      const double out = hermitian_commutator_norm(fi, fj, scratch);
      if ((in <= ptol) != (out <= ptol))
        throw MapHypothesisError(ErrorCode::NotCommutativityPreserving,
                                 "pair " + std::to_string(i) + ", " + std::to_string(j) +
                                     " breaks commutativity preservation",
                                 {i, j, in, out});
      commutes[i * count + j] = commutes[j * count + i] = in <= ptol;
    }

  // Apartments of the domain: maximal commuting groups, taken greedily.
  std::vector<GroupData> groups;
  std::vector<int> group_of(count, -1);
  std::vector<std::size_t> index_in_group(count, 0);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t g = 0; g < groups.size() && group_of[i] < 0; ++g) {
      const auto& members = groups[g].members;
      const bool fits = std::all_of(members.begin(), members.end(),
                                    [&](std::size_t m) { return commutes[i * count + m] != 0; });
      if (fits) {
        index_in_group[i] = members.size();
        groups[g].members.push_back(i);
        group_of[i] = static_cast<int>(g);
      }
    }
    if (group_of[i] < 0) {
      group_of[i] = static_cast<int>(groups.size());
      groups.push_back({});
      groups.back().members.push_back(i);
    }
  }

  const std::uint64_t expected_size = apartment_size(spec);
  const int n = spec.dim();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& group = groups[g];
    if (group.members.size() != expected_size)
      throw Error(ErrorCode::DomainIncomplete, "apartment " + std::to_string(g) + " has " +
                                                   std::to_string(group.members.size()) + " of " +
                                                   std::to_string(expected_size) + " operators");
    std::vector<HermitianOperator> inputs;
    std::vector<HermitianOperator> outputs;
    for (auto m : group.members) {
      inputs.push_back(map[m].input);
      outputs.push_back(map[m].output);
    }
    group.source = common_eigenbasis(inputs, options.seed + 2 * g);
    try {
      for (const auto& op : inputs) group.partitions.push_back(recover_partition(op, group.source, spec));
    } catch (const Error&) {
      throw Error(ErrorCode::DomainIncomplete, "inputs of apartment " + std::to_string(g) +
                                                   " are not one apartment of the class");
    }
    if (std::set<LabeledPartition>(group.partitions.begin(), group.partitions.end()).size() != expected_size)
      throw Error(ErrorCode::DomainIncomplete, "apartment " + std::to_string(g) + " repeats an operator");

    // Output eigenlines and the slot each output assigns to them.
    const Basis lines = common_eigenbasis(outputs, options.seed + 2 * g + 1);
    const auto size = group.members.size();
    std::vector<std::vector<int>> out_slot(size, std::vector<int>(static_cast<std::size_t>(n), -1));
    for (std::size_t k = 0; k < size; ++k) {
      const Matrix local = lines.columns().adjoint() * outputs[k].matrix() * lines.columns();
      for (int c = 0; c < n; ++c) {
        double off = 0.0;
        for (int r2 = 0; r2 < n; ++r2)
          if (r2 != c) off = std::max(off, std::abs(local(r2, c)));
        const double value = local(c, c).real();
        for (int s = 0; s < spec.num_slots() && off <= options.residual_tolerance; ++s)
          if (std::abs(value - spec.slot_value(s)) <= options.residual_tolerance) out_slot[k][static_cast<std::size_t>(c)] = s;
        if (out_slot[k][static_cast<std::size_t>(c)] < 0)
          return {std::nullopt, "image of apartment " + std::to_string(g) + " is not diagonal in one frame",
                  group.members[k]};
      }
    }

    // Match input indices to output lines through the A_ij membership pattern.
    std::map<std::vector<char>, std::vector<PairIndex>> line_pairs;
    for (const auto& pair : all_pairs(n)) {
      std::vector<char> key(size);
      for (std::size_t k = 0; k < size; ++k)
        key[k] = out_slot[k][static_cast<std::size_t>(pair.i)] == out_slot[k][static_cast<std::size_t>(pair.j)];
      line_pairs[key].push_back(pair);
    }
    std::vector<std::vector<int>> hits(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), 0));
    for (const auto& pair : all_pairs(n)) {
      std::vector<char> key(size);
      for (std::size_t k = 0; k < size; ++k) key[k] = in_a_ij(group.partitions[k], pair);
      const auto found = line_pairs.find(key);
      if (found == line_pairs.end() || found->second.size() != 1)
        return {std::nullopt, "fused-pair pattern of apartment " + std::to_string(g) + " is not preserved",
                group.members.front()};
      const PairIndex image = found->second.front();
      for (int end : {pair.i, pair.j}) {
        ++hits[static_cast<std::size_t>(end)][static_cast<std::size_t>(image.i)];
        ++hits[static_cast<std::size_t>(end)][static_cast<std::size_t>(image.j)];
      }
    }
    std::vector<int> sigma(static_cast<std::size_t>(n), -1);
    std::set<int> used;
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c)
        if (hits[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)] == n - 1) {
          if (sigma[static_cast<std::size_t>(b)] >= 0) sigma[static_cast<std::size_t>(b)] = -2;
          else sigma[static_cast<std::size_t>(b)] = c;
        }
      if (sigma[static_cast<std::size_t>(b)] < 0 || !used.insert(sigma[static_cast<std::size_t>(b)]).second)
        return {std::nullopt, "no line correspondence for apartment " + std::to_string(g), group.members.front()};
    }
    group.targets = Matrix(n, n);
    for (int b = 0; b < n; ++b) group.targets.col(b) = lines.column(sigma[static_cast<std::size_t>(b)]);
  }

  Attempt plain = try_flag(spec, map, groups, group_of, index_in_group, false, options);
  Attempt anti = try_flag(spec, map, groups, group_of, index_in_group, true, options);
  DecomposeOutcome outcome;
  if (plain.ok || anti.ok) {
    Attempt& chosen = plain.ok ? plain : anti;
    chosen.decomposition.flag_ambiguous = plain.ok && anti.ok;
    outcome.decomposition = std::move(chosen.decomposition);
    return outcome;
  }
  const Attempt& closer = plain.worst <= anti.worst ? plain : anti;
  outcome.failure = "no unitary or antiunitary frame reproduces the map (residual " +
                    std::to_string(closer.worst) + ")";
  outcome.first_unmatched = closer.first_unmatched;
  return outcome;
}

std::optional<ProjectionAnalysis> analyze_projection_map(const ClassSpec& spec, const OperatorMap& map,
                                                         const DecomposeOptions& options) {
  if (!spec.is_scaled_projection_class() || spec.dim() != 2 * spec.rank() || !spec.assumptions_hold())
    throw Error(ErrorCode::PreconditionViolated,
                "projection analysis needs lambda * P_k with dim H = 2k and k >= 4");
  auto outcome = decompose_map(spec, map, options);
  if (!outcome.success()) return std::nullopt;
  ProjectionAnalysis analysis{std::move(*outcome.decomposition), {}};
  for (const auto& op : analysis.decomposition.operators) analysis.complement.push_back(!op.delta.is_identity());
  return analysis;
}

}  // namespace apartmentlab
