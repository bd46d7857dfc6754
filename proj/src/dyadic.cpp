#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "tha/geometry.hpp"

namespace tha {

const char* dyadic_type_name(DyadicType t) {
  switch (t) {
    case DyadicType::I: return "I";
    case DyadicType::II: return "II";
    case DyadicType::III: return "III";
    case DyadicType::IV: return "IV";
    case DyadicType::V: return "V";
  }
  return "?";
}

DyadicType parse_dyadic_type(const std::string& s) {
  if (s == "I") return DyadicType::I;
  if (s == "II") return DyadicType::II;
  if (s == "III") return DyadicType::III;
  if (s == "IV") return DyadicType::IV;
  if (s == "V") return DyadicType::V;
  throw ConfigError("unknown dyadic type '" + s + "'");
}

// The strict inequalities of the slant cases leave j1 = j2 < j3 unclassified; testing the
// slant-first case with j1, j3 >= j2 after type I closes the gap and agrees elsewhere.
ScaleClass classify_scale(const std::array<int, 3>& j) {
  if (j[0] >= j[2] && j[1] >= j[2]) return {DyadicType::I, j[0], j[1]};
  if (j[0] >= j[1] && j[2] >= j[1]) return {j[0] <= j[2] ? DyadicType::II : DyadicType::III, j[0], j[2]};
  return {j[1] <= j[2] ? DyadicType::IV : DyadicType::V, j[1], j[2]};
}

bool type_admits(DyadicType t, int s1, int s2) {
  switch (t) {
    case DyadicType::I: return true;
    case DyadicType::II:
    case DyadicType::IV: return s1 <= s2;
    case DyadicType::III:
    case DyadicType::V: return s1 > s2;
  }
  return false;
}

namespace {

bool slant_first(DyadicType t) { return t == DyadicType::II || t == DyadicType::III; }
bool slant_second(DyadicType t) { return t == DyadicType::IV || t == DyadicType::V; }

}  // namespace

double DyadicTube::measure() const { return std::pow(std::ldexp(1.0, j1 + j2), m()); }

std::vector<double> DyadicTube::lattice_offset() const {
  const std::size_t mm = a.size();
  std::vector<double> out(2 * mm);
  for (std::size_t c = 0; c < mm; ++c) {
    const double n1 = std::ldexp(static_cast<double>(a[c]), j1);
    const double n2 = std::ldexp(static_cast<double>(b[c]), j2);
    out[c] = slant_first(type) ? n1 + n2 : n1;
    out[mm + c] = slant_second(type) ? n1 + n2 : n2;
  }
  return out;
}

bool DyadicTube::contains(std::span<const double> p) const {
  const std::size_t mm = a.size();
  if (p.size() != 2 * mm) throw ConfigError("DyadicTube::contains: dimension mismatch");
  const double w1 = std::ldexp(1.0, j1);
  const double w2 = std::ldexp(1.0, j2);
  for (std::size_t c = 0; c < mm; ++c) {
    const double u = slant_first(type) ? p[c] - p[mm + c] : p[c];
    const double v = slant_second(type) ? p[mm + c] - p[c] : p[mm + c];
    const double u0 = static_cast<double>(a[c]) * w1;
    const double v0 = static_cast<double>(b[c]) * w2;
    if (!(u >= u0 && u < u0 + w1 && v >= v0 && v < v0 + w2)) return false;
  }
  return true;
}

namespace {

// log2 of the cell size; dyadic work needs h = L/n to be a power of two.
int cell_exponent(const GridSpec& spec) {
  const double h = spec.spacing();
  const int e = static_cast<int>(std::lround(std::log2(h)));
  if (std::abs(std::ldexp(1.0, e) - h) > 1e-12 * h)
    throw DomainError("dyadic tubes need a power-of-two cell size, got h = " + std::to_string(h));
  return e;
}

int log2n(const GridSpec& spec) { return std::countr_zero(static_cast<unsigned>(spec.n())); }

// Cell (i1, i2) -> sheared coordinates (u, v) per component, and back.
void to_sheared(DyadicType t, int n, std::span<const int> i1, std::span<const int> i2, std::span<int> u,
                std::span<int> v) {
  for (std::size_t c = 0; c < i1.size(); ++c) {
    u[c] = slant_first(t) ? ((i1[c] - i2[c]) % n + n) % n : i1[c];
    v[c] = slant_second(t) ? ((i2[c] - i1[c]) % n + n) % n : i2[c];
  }
}

void from_sheared(DyadicType t, int n, std::span<const int> u, std::span<const int> v, std::span<int> i1,
                  std::span<int> i2) {
  for (std::size_t c = 0; c < u.size(); ++c) {
    i1[c] = slant_first(t) ? (u[c] + v[c]) % n : u[c];
    i2[c] = slant_second(t) ? (u[c] + v[c]) % n : v[c];
  }
}

// Tube in cell units: interval widths c1 = 2^k1, c2 = 2^k2 and their indices.
struct CellBox {
  int k1, k2;
  std::vector<long> a, b;
};

CellBox to_cells(const DyadicTube& t, int e) { return {t.j1 - e, t.j2 - e, t.a, t.b}; }

// Visit the grid cells of a tube (periodic window).
template <typename F>
void for_each_cell(const GridSpec& spec, DyadicType type, const CellBox& box, F&& f) {
  const int m = spec.m();
  const int n = spec.n();
  const int c1 = 1 << box.k1;
  const int c2 = 1 << box.k2;
  const auto mm = static_cast<std::size_t>(m);
  std::vector<int> du(mm, 0), dv(mm, 0), u(mm), v(mm), i1(mm), i2(mm);
  while (true) {
    for (std::size_t c = 0; c < mm; ++c) {
      u[c] = static_cast<int>(box.a[c]) * c1 + du[c];
      v[c] = static_cast<int>(box.b[c]) * c2 + dv[c];
    }
    from_sheared(type, n, u, v, i1, i2);
    f(spec.join(spec.block_flat(i1), spec.block_flat(i2)));
    // odometer over du (extent c1) then dv (extent c2)
    std::size_t axis = 0;
    for (; axis < 2 * mm; ++axis) {
      auto& d = axis < mm ? du[axis] : dv[axis - mm];
      const int ext = axis < mm ? c1 : c2;
      if (++d < ext) break;
      d = 0;
    }
    if (axis == 2 * mm) break;
  }
}

// Summed-area table of a mask in sheared coordinates (u_1..u_m, v_1..v_m).
class ShearedCounts {
 public:
  ShearedCounts(const OpenSetMask& mask, DyadicType type) : n_(mask.spec.n()), d_(mask.spec.dims()) {
    const GridSpec& spec = mask.spec;
    const auto mm = static_cast<std::size_t>(spec.m());
    stride_.assign(static_cast<std::size_t>(d_), 1);
    for (int k = d_ - 2; k >= 0; --k)
      stride_[static_cast<std::size_t>(k)] = stride_[static_cast<std::size_t>(k) + 1] * static_cast<std::size_t>(n_ + 1);
    table_.assign(stride_[0] * static_cast<std::size_t>(n_ + 1), 0);
    std::vector<int> i1(mm), i2(mm), u(mm), v(mm);
    for (std::size_t p = 0; p < spec.size(); ++p) {
      if (!mask.cells[p]) continue;
      spec.block_indices(spec.block1_of(p), i1);
      spec.block_indices(spec.block2_of(p), i2);
      to_sheared(type, n_, i1, i2, u, v);
      std::size_t at = 0;
      for (std::size_t c = 0; c < mm; ++c) {
        at += static_cast<std::size_t>(u[c] + 1) * stride_[c];
        at += static_cast<std::size_t>(v[c] + 1) * stride_[mm + c];
      }
      table_[at] += 1;
    }
    for (int axis = 0; axis < d_; ++axis) {
      const std::size_t s = stride_[static_cast<std::size_t>(axis)];
      for (std::size_t p = 0; p < table_.size(); ++p)
        if ((p / s) % static_cast<std::size_t>(n_ + 1) != 0) table_[p] += table_[p - s];
    }
  }

  // Number of set cells in the box [lo, hi) (sheared coordinates, no wrap).
  long box(std::span<const int> lo, std::span<const int> hi) const {
    long total = 0;
    const unsigned corners = 1u << d_;
    for (unsigned mask = 0; mask < corners; ++mask) {
      std::size_t at = 0;
      int lows = 0;
      for (int k = 0; k < d_; ++k) {
        const bool low = (mask >> k) & 1u;
        lows += low;
        at += static_cast<std::size_t>(low ? lo[static_cast<std::size_t>(k)] : hi[static_cast<std::size_t>(k)]) *
              stride_[static_cast<std::size_t>(k)];
      }
      total += (lows % 2 ? -1 : 1) * table_[at];
    }
    return total;
  }

  bool full(const CellBox& b) const {
    const auto mm = b.a.size();
    std::vector<int> lo(2 * mm), hi(2 * mm);
    long volume = 1;
    for (std::size_t c = 0; c < mm; ++c) {
      lo[c] = static_cast<int>(b.a[c]) << b.k1;
      hi[c] = lo[c] + (1 << b.k1);
      lo[mm + c] = static_cast<int>(b.b[c]) << b.k2;
      hi[mm + c] = lo[mm + c] + (1 << b.k2);
      volume *= (1L << b.k1) * (1L << b.k2);
    }
    return box(lo, hi) == volume;
  }

 private:
  int n_;
  int d_;
  std::vector<std::size_t> stride_;
  std::vector<long> table_;
};

// All index vectors in [0, count)^m.
template <typename F>
void for_each_index(std::size_t m, long count, F&& f) {
  std::vector<long> idx(m, 0);
  while (true) {
    f(idx);
    std::size_t axis = 0;
    for (; axis < m; ++axis) {
      if (++idx[axis] < count) break;
      idx[axis] = 0;
    }
    if (axis == m) break;
  }
}

}  // namespace

std::vector<DyadicTube> enumerate_scale(const std::array<int, 3>& j, const GridSpec& spec) {
  const int e = cell_exponent(spec);
  const ScaleClass sc = classify_scale(j);
  const int k1 = sc.s1 - e;
  const int k2 = sc.s2 - e;
  const int top = log2n(spec);
  if (k1 < 0 || k2 < 0) throw DomainError("enumerate_scale: interval finer than one cell");
  if (k1 > top || k2 > top) throw DomainError("enumerate_scale: interval wider than the box");
  const auto mm = static_cast<std::size_t>(spec.m());
  std::vector<DyadicTube> out;
  for_each_index(mm, spec.n() >> k1, [&](const std::vector<long>& a) {
    for_each_index(mm, spec.n() >> k2, [&](const std::vector<long>& b) {
      out.push_back(DyadicTube{sc.type, sc.s1, sc.s2, a, b});
    });
  });
  return out;
}

std::vector<int> coverage_count(std::span<const DyadicTube> tubes, const GridSpec& spec) {
  const int e = cell_exponent(spec);
  std::vector<int> count(spec.size(), 0);
  for (const auto& t : tubes) {
    if (t.m() != spec.m()) throw SpecMismatch("coverage_count: tube dimension differs from grid");
    for_each_cell(spec, t.type, to_cells(t, e), [&](std::size_t p) { ++count[p]; });
  }
  return count;
}

OpenSetMask OpenSetMask::empty(const GridSpec& spec) {
  return OpenSetMask{spec, std::vector<std::uint8_t>(spec.size(), 0)};
}

OpenSetMask OpenSetMask::from_predicate(const GridSpec& spec, const std::vector<double>& values,
                                        double threshold) {
  if (values.size() != spec.size()) throw SpecMismatch("mask: sample count mismatch");
  OpenSetMask out = empty(spec);
  for (std::size_t p = 0; p < values.size(); ++p) out.cells[p] = values[p] > threshold;
  return out;
}

std::size_t OpenSetMask::count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

double OpenSetMask::measure() const { return static_cast<double>(count()) * spec.cell_measure(); }

bool OpenSetMask::subset_of(const OpenSetMask& other) const {
  require_same_grid(spec, other.spec, "mask subset");
  for (std::size_t p = 0; p < cells.size(); ++p)
    if (cells[p] && !other.cells[p]) return false;
  return true;
}

void OpenSetMask::add(const DyadicTube& tube) {
  for_each_cell(spec, tube.type, to_cells(tube, cell_exponent(spec)), [&](std::size_t p) { cells[p] = 1; });
}

bool OpenSetMask::contains(const DyadicTube& tube) const {
  bool all = true;
  for_each_cell(spec, tube.type, to_cells(tube, cell_exponent(spec)),
                [&](std::size_t p) { all = all && cells[p] != 0; });
  return all;
}

std::vector<double> OpenSetMask::indicator() const { return {cells.begin(), cells.end()}; }

std::vector<DyadicTube> maximal_tubes(const OpenSetMask& omega, DyadicType type, int axis) {
  if (axis != 1 && axis != 2) throw ConfigError("maximal_tubes: axis must be 1 or 2");
  const GridSpec& spec = omega.spec;
  std::vector<DyadicTube> out;
  if (omega.is_empty()) return out;
  const int e = cell_exponent(spec);
  const int top = log2n(spec);
  const auto mm = static_cast<std::size_t>(spec.m());
  const ShearedCounts counts(omega, type);
  for (int k1 = 0; k1 <= top; ++k1)
    for (int k2 = 0; k2 <= top; ++k2) {
      if (!type_admits(type, k1 + e, k2 + e)) continue;
      const int pk1 = k1 + (axis == 1);
      const int pk2 = k2 + (axis == 2);
      const bool parent_exists = pk1 <= top && pk2 <= top && type_admits(type, pk1 + e, pk2 + e);
      for_each_index(mm, spec.n() >> k1, [&](const std::vector<long>& a) {
        for_each_index(mm, spec.n() >> k2, [&](const std::vector<long>& b) {
          CellBox box{k1, k2, a, b};
          if (!counts.full(box)) return;
          if (parent_exists) {
            CellBox parent{pk1, pk2, a, b};
            for (auto& v : axis == 1 ? parent.a : parent.b) v >>= 1;
            if (counts.full(parent)) return;
          }
          out.push_back(DyadicTube{type, k1 + e, k2 + e, a, b});
        });
      });
    }
  return out;
}

namespace {

DyadicTube enlarge_with(const DyadicTube& R, const ShearedCounts& halo, int which, int e, int top) {
  DyadicTube best = R;
  CellBox box = to_cells(R, e);
  while (true) {
    int& k = which == 1 ? box.k1 : box.k2;
    if (k + 1 > top) break;
    ++k;
    for (auto& v : which == 1 ? box.a : box.b) v >>= 1;
    if (!halo.full(box)) break;
    best.j1 = box.k1 + e;
    best.j2 = box.k2 + e;
    best.a = box.a;
    best.b = box.b;
  }
  return best;
}

}  // namespace

DyadicTube journe_enlarge(const DyadicTube& R, const OpenSetMask& halo, int which) {
  if (which != 1 && which != 2) throw ConfigError("journe_enlarge: which must be 1 or 2");
  const ShearedCounts counts(halo, R.type);
  return enlarge_with(R, counts, which, cell_exponent(halo.spec), log2n(halo.spec));
}

CoveringSum covering_sum(const OpenSetMask& omega, const OpenSetMask& halo, DyadicType type, double kappa,
                         int axis) {
  if (!(kappa > 0.0)) throw ConfigError("covering_sum: kappa must be positive");
  if (omega.is_empty()) throw PreconditionError("covering_sum: empty set");
  require_same_grid(omega.spec, halo.spec, "covering_sum");
  const int e = cell_exponent(omega.spec);
  const int top = log2n(omega.spec);
  const int which = 3 - axis;
  const ShearedCounts counts(halo, type);
  CoveringSum out;
  for (const auto& R : maximal_tubes(omega, type, axis)) {
    const DyadicTube hat = enlarge_with(R, counts, which, e, top);
    const int j = which == 1 ? R.j1 : R.j2;
    const int jh = which == 1 ? hat.j1 : hat.j2;
    out.sum += R.measure() * std::pow(std::ldexp(1.0, j - jh), kappa);
    ++out.tubes;
  }
  out.ratio = out.sum / omega.measure();
  return out;
}

void save_mask(const std::string& path, const OpenSetMask& mask) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  const std::size_t B = mask.spec.block_size();
  out << "P1\n" << B << ' ' << B << '\n';
  for (std::size_t r = 0; r < B; ++r) {
    for (std::size_t c = 0; c < B; ++c) out << (c ? " " : "") << int(mask.cells[mask.spec.join(r, c)]);
    out << '\n';
  }
  std::ofstream side(path + ".json");
  if (!side) throw ConfigError("cannot open " + path + ".json for writing");
  side << nlohmann::json{{"m", mask.spec.m()}, {"n", mask.spec.n()}, {"L", mask.spec.period()}}.dump(2) << '\n';
}

OpenSetMask load_mask(const std::string& path) {
  std::ifstream side(path + ".json");
  if (!side) throw ConfigError("mask: missing sidecar " + path + ".json");
  GridSpec spec;
  try {
    const auto j = nlohmann::json::parse(side);
    spec = make_grid(j.at("m").get<int>(), j.at("n").get<int>(), j.at("L").get<double>());
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("mask sidecar: ") + ex.what());
  }
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream clean;
  for (std::string line; std::getline(in, line);) clean << line.substr(0, line.find('#')) << '\n';
  std::string magic;
  std::size_t w = 0, h = 0;
  clean >> magic >> w >> h;
  if (magic != "P1") throw ConfigError("mask: expected a P1 bitmap");
  if (w != spec.block_size() || h != spec.block_size()) throw SpecMismatch("mask: bitmap size disagrees with sidecar");
  OpenSetMask mask = OpenSetMask::empty(spec);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      char ch = 0;
      if (!(clean >> ch) || (ch != '0' && ch != '1')) throw ConfigError("mask: truncated or invalid bitmap");
      mask.cells[spec.join(r, c)] = ch == '1';
    }
  return mask;
}

void write_tubes_csv(std::ostream& out, std::span<const DyadicTube> tubes) {
  const int m = tubes.empty() ? 1 : tubes.front().m();
  out << "type,j1,j2";
  for (int k = 0; k < 2 * m; ++k) out << ",offset_" << (k + 1);
  out << '\n';
  for (const auto& t : tubes) {
    out << dyadic_type_name(t.type) << ',' << t.j1 << ',' << t.j2;
    for (double v : t.lattice_offset()) out << ',' << v;
    out << '\n';
  }
}

}  // namespace tha
