#include "seqquant/action_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "seqquant/errors.hpp"
#include "seqquant/parallel.hpp"
#include "seqquant/simd/kernels.hpp"

namespace seqquant {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// exp(-800) underflows to zero, so shifts further left than this read nothing.
constexpr double kLeftCutoff = 800.0;

}  // namespace

CellShift make_cell_shift(double q0, double q1, double step, int max_offset) {
  if (!(q0 > 0.0) || !(q1 > 0.0)) return {};
  const double u = (std::log(q1) - std::log(q0)) / step;
  if (u >= max_offset) return {q0, 0.0, max_offset};
  if (u * step < -(max_offset * step + kLeftCutoff)) return {};
  const double j = std::floor(u);
  const double fr = u - j;
  return {q0 * (1.0 - fr), q0 * fr, static_cast<int>(j)};
}

ActionSet::ActionSet(const ObservationModel& model, InputTransform transform, int K)
    : model_(model), transform_(transform), K_(K) {}

ActionSet ActionSet::from_grid(const ObservationModel& model, const ThetaGrid& grid) {
  grid.validate();
  ActionSet set(model, grid.transform, grid.K);
  set.grid_ = grid;
  set.cells_ = std::make_shared<const GridCells>(model, grid);
  return set;
}

ActionSet ActionSet::from_list(const ObservationModel& model, std::vector<QuantizerParams> candidates,
                               InputTransform transform) {
  if (candidates.empty()) throw InvalidArgument("action list is empty");
  const int K = candidates.front().K();
  ActionSet set(model, transform, K);
  for (const auto& c : candidates) {
    c.validate();
    if (c.K() != K) throw InvalidArgument("all quantizers in an action list need the same K");
    const Pmf p0 = post_quantizer_pmf(model, Hypothesis::H0, c, transform);
    const Pmf p1 = post_quantizer_pmf(model, Hypothesis::H1, c, transform);
    set.list_q0_.insert(set.list_q0_.end(), p0.probs.begin(), p0.probs.end());
    set.list_q1_.insert(set.list_q1_.end(), p1.probs.begin(), p1.probs.end());
  }
  set.candidates_ = std::move(candidates);
  return set;
}

QuantizerParams ActionSet::params(std::span<const std::int32_t> choice) const {
  if (!is_grid()) return candidates_.at(choice[0]);
  QuantizerParams p;
  for (int k = 0; k < K_ - 1; ++k) p.levels.push_back(cells_->points()[choice[k]]);
  return p;
}

void ActionSet::masses(std::span<const std::int32_t> choice, std::span<double> q0, std::span<double> q1) const {
  if (!is_grid()) {
    const std::size_t at = static_cast<std::size_t>(choice[0]) * K_;
    std::copy_n(list_q0_.begin() + at, K_, q0.begin());
    std::copy_n(list_q1_.begin() + at, K_, q1.begin());
    return;
  }
  std::vector<int> idx(choice.begin(), choice.begin() + (K_ - 1));
  std::vector<int> bounds(K_ + 1);
  GridCells::boundaries(idx, cells_->num_points(), bounds);
  for (int k = 0; k < K_; ++k) {
    q0[k] = cells_->q0(bounds[k], bounds[k + 1]);
    q1[k] = cells_->q1(bounds[k], bounds[k + 1]);
  }
}

ContinuationOperator::ContinuationOperator(const ActionSet& actions, const ZGrid& zgrid)
    : actions_(actions), zgrid_(zgrid) {
  const int n = zgrid.n_points();
  const double step = zgrid.step();
  if (actions.is_grid()) {
    const GridCells& cells = *actions.cells();
    shifts_.resize(cells.size());
    for (int lo = 0; lo < cells.extended_size(); ++lo)
      for (int hi = lo + 1; hi < cells.extended_size(); ++hi)
        shifts_[cells.index(lo, hi)] = make_cell_shift(cells.q0(lo, hi), cells.q1(lo, hi), step, n);
  } else {
    const int K = actions.K();
    std::vector<double> q0(K), q1(K);
    for (std::int32_t c = 0; c < static_cast<std::int32_t>(actions.candidates().size()); ++c) {
      actions.masses(std::span(&c, 1), q0, q1);
      for (int k = 0; k < K; ++k) shifts_.push_back(make_cell_shift(q0[k], q1[k], step, n));
    }
  }

  int lo = 0, hi = 0;
  for (const CellShift& s : shifts_) {
    if (!s.active()) continue;
    lo = std::min(lo, s.offset);
    hi = std::max(hi, s.offset);
  }
  pad_left_ = -lo + 2;
  pad_right_ = hi + 2;
  left_scale_.resize(pad_left_);
  for (int k = 0; k < pad_left_; ++k) left_scale_[k] = std::exp(-(k + 1) * step);

  if (actions.is_grid()) {
    const int G = actions.cells()->num_points();
    const int levels = std::max(actions.K() - 1, 1);
    const int fit = 524288 / (levels * G);
    chunk_ = std::clamp(fit / 8 * 8, 16, 512);
  } else {
    chunk_ = 512;
  }
}

void ContinuationOperator::pad_value_function(std::span<const double> rho, double right_value,
                                              std::vector<double>& ext) const {
  ext.resize(table_size());
  for (int k = 0; k < pad_left_; ++k) ext[pad_left_ - 1 - k] = rho[0] * left_scale_[k];
  std::copy(rho.begin(), rho.end(), ext.begin() + pad_left_);
  std::fill(ext.begin() + pad_left_ + n(), ext.end(), right_value);
}

void ContinuationOperator::shifts(std::span<const std::int32_t> choice, std::span<CellShift> out) const {
  const int K = actions_.K();
  if (!actions_.is_grid()) {
    std::copy_n(shifts_.begin() + static_cast<std::size_t>(choice[0]) * K, K, out.begin());
    return;
  }
  const GridCells& cells = *actions_.cells();
  int lo = 0;
  for (int k = 0; k < K; ++k) {
    const int hi = k + 1 < K ? choice[k] + 1 : cells.num_points() + 1;
    out[k] = lo < hi ? shifts_[cells.index(lo, hi)] : CellShift{};
    lo = hi;
  }
}

void ContinuationOperator::apply(std::span<const double> ext, std::span<const std::int32_t> choice,
                                 std::span<double> cont) const {
  const int K = actions_.K();
  const int width = actions_.choice_width();
  std::vector<CellShift> s(K);
  for (int i = 0; i < n(); ++i) {
    shifts(choice.subspan(static_cast<std::size_t>(i) * width, width), s);
    double acc = 0.0;
    for (int k = K - 1; k >= 0; --k) acc = term(ext.data(), s[k], i) + acc;
    cont[i] = acc;
  }
}

void ContinuationOperator::minimize(std::span<const double> ext, std::span<double> cont,
                                    std::span<std::int32_t> choice, int threads) const {
  const int chunks = (n() + chunk_ - 1) / chunk_;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const int begin = static_cast<int>(c) * chunk_;
    const int len = std::min(chunk_, n() - begin);
    if (actions_.is_grid())
      minimize_grid_chunk(ext.data(), begin, len, cont.data(), choice.data());
    else
      minimize_list_chunk(ext.data(), begin, len, cont.data(), choice.data());
  });
}

void ContinuationOperator::minimize_list_chunk(const double* ext, int begin, int len, double* cont,
                                               std::int32_t* choice) const {
  const auto& kern = simd::active_kernels();
  const int K = actions_.K();
  const auto count = static_cast<std::int32_t>(actions_.candidates().size());
  std::vector<double> acc(len);
  std::vector<std::int32_t> arg(len, 0);
  double* best = cont + begin;
  std::fill_n(best, len, kInf);
  for (std::int32_t c = 0; c < count; ++c) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int k = K - 1; k >= 0; --k) {
      const CellShift& s = shifts_[static_cast<std::size_t>(c) * K + k];
      kern.accumulate_shifted(acc.data(), ext + pad_left_ + s.offset + begin, s.w0, s.w1, len);
    }
    kern.relax_argmin(best, arg.data(), acc.data(), c, len);
  }
  std::copy(arg.begin(), arg.end(), choice + begin);
}

// Chain recursion over ordered levels. With L = K - 1 levels and R_s(a) the
// cheapest sum of the cells right of level s when level s sits at index a:
//   R_L(a) = t(a, inf),  R_s(a) = min(R_{s+1}(a), min_{b > a} t(a, b) + R_{s+1}(b)),
// and the total is min_a t(-inf, a) + R_1(a). Sums run right to left, exactly
// as apply() evaluates a fixed action, and FP addition is monotone, so this
// equals the exhaustive minimum over all candidates bit for bit.
void ContinuationOperator::minimize_grid_chunk(const double* ext, int begin, int len, double* cont,
                                               std::int32_t* choice) const {
  const auto& kern = simd::active_kernels();
  const GridCells& cells = *actions_.cells();
  const int G = cells.num_points();
  const int L = actions_.K() - 1;
  const double* base = ext + pad_left_ + begin;
  auto sh = [&](int lo, int hi) -> const CellShift& { return shifts_[cells.index(lo, hi)]; };
  double* total = cont + begin;

  if (L == 0) {
    const CellShift& s = sh(0, G + 1);
    kern.shifted(total, base + s.offset, s.w0, s.w1, len);
    return;
  }

  const std::size_t stride = static_cast<std::size_t>(len);
  std::vector<double> R(static_cast<std::size_t>(L) * G * stride);
  auto row = [&](int s, int a) { return R.data() + (static_cast<std::size_t>(s - 1) * G + a) * stride; };
  std::vector<double> tmp(len);

  for (int a = G - 1; a >= 0; --a) {
    const CellShift& last = sh(a + 1, G + 1);
    kern.shifted(row(L, a), base + last.offset, last.w0, last.w1, len);
    if (L == 1) continue;
    for (int s = 1; s < L; ++s) std::fill_n(row(s, a), len, kInf);
    for (int b = a + 1; b < G; ++b) {
      const CellShift& mid = sh(a + 1, b + 1);
      kern.shifted(tmp.data(), base + mid.offset, mid.w0, mid.w1, len);
      for (int s = 1; s < L; ++s) kern.relax_sum(row(s, a), tmp.data(), row(s + 1, b), len);
    }
    for (int s = L - 1; s >= 1; --s) kern.relax(row(s, a), row(s + 1, a), len);
  }

  std::fill_n(total, len, kInf);
  for (int a = 0; a < G; ++a) {
    const CellShift& first = sh(0, a + 1);
    kern.relax_shifted(total, row(1, a), base + first.offset, first.w0, first.w1, len);
  }

  // Lexicographically first minimizer, replaying the same scalar sums.
  for (int t = 0; t < len; ++t) {
    const int node = begin + t;
    std::int32_t* out = choice + static_cast<std::size_t>(node) * L;
    int a = 0;
    while (a < G && !(term(ext, sh(0, a + 1), node) + row(1, a)[t] == total[t])) ++a;
    if (a == G) throw std::logic_error("argmin reconstruction failed");
    out[0] = a;
    for (int s = 1; s < L; ++s) {
      const double target = row(s, a)[t];
      int b = a;
      if (!(row(s + 1, a)[t] == target)) {
        b = a + 1;
        while (b < G && !(term(ext, sh(a + 1, b + 1), node) + row(s + 1, b)[t] == target)) ++b;
        if (b == G) throw std::logic_error("argmin reconstruction failed");
      }
      out[s] = b;
      a = b;
    }
  }
}

}  // namespace seqquant
