#include "dcpl/synth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dcpl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b, r = a % b;
  return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

std::int64_t pos_mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

bool on_lattice(std::int64_t j, std::int64_t m, std::int64_t R) {
  // |m - j^2/R| <= 1  <=>  j^2 - R <= m R <= j^2 + R
  if (j < -R || j > R) return false;
  std::int64_t jj = j * j;
  return jj - R <= m * R && m * R <= jj + R;
}

}  // namespace

std::vector<LatticePoint> build_lattice(std::uint64_t R) {
  auto Ri = static_cast<std::int64_t>(R);
  if (Ri <= 0) throw std::invalid_argument("build_lattice: R must be positive");
  std::vector<LatticePoint> pts;
  pts.reserve(static_cast<std::size_t>(3 * (2 * Ri + 1)));
  for (std::int64_t j = -Ri; j <= Ri; ++j) {
    std::int64_t lo = ceil_div(j * j - Ri, Ri);
    std::int64_t hi = floor_div(j * j + Ri, Ri);
    for (std::int64_t m = lo; m <= hi; ++m) pts.push_back({j, m});
  }
  return pts;
}

void validate_profile(const FrequencyProfile& p) {
  if (p.R == 0 || (p.R & (p.R - 1)) != 0)
    throw std::invalid_argument("profile: R must be a power of two");
  auto Ri = static_cast<std::int64_t>(p.R);
  const ProfileEntry* prev = nullptr;
  for (const auto& e : p.entries) {
    if (!on_lattice(e.j, e.m, Ri))
      throw std::invalid_argument("profile: entry off the frequency lattice");
    if (!std::isfinite(e.a.real()) || !std::isfinite(e.a.imag()))
      throw std::invalid_argument("profile: non-finite coefficient");
    if (prev && (e.j < prev->j || (e.j == prev->j && e.m <= prev->m)))
      throw std::invalid_argument("profile: entries must be strictly ordered by (j, m)");
    prev = &e;
  }
}

SampledField synthesize(const FrequencyProfile& p, const GridSpec& g) {
  validate_profile(p);
  if (g.R != p.R) throw std::invalid_argument("synthesize: grid R differs from profile R");
  SampledField f;
  f.grid = g;
  f.values = CArray::Zero(g.M, g.M);
  for (const auto& e : p.entries) {
    auto row = static_cast<Eigen::Index>(pos_mod(e.m, g.M));
    auto col = static_cast<Eigen::Index>(pos_mod(e.j, g.M));
    f.values(row, col) += e.a;
  }
  fft2_inplace(f.values, +1);
  return f;
}

FrequencyProfile cap_component(const FrequencyProfile& p, const Cap& cap) {
  FrequencyProfile out;
  out.R = p.R;
  for (const auto& e : p.entries)
    if (cap.contains_xi1(e.j, p.R)) out.entries.push_back(e);
  return out;
}

double lp_norm(const SampledField& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  double cell = f.grid.cell_area();
  if (p == 2.0) {
    double s = f.values.abs2().sum();
    return std::sqrt(s * cell);
  }
  double s = f.values.abs2().pow(p / 2.0).sum();
  return std::pow(s * cell, 1.0 / p);
}

double lp_norm_exact_even(const FrequencyProfile& p, int pexp) {
  if (pexp < 2 || pexp % 2 != 0)
    throw std::invalid_argument("lp_norm_exact_even: p must be a positive even integer");
  // difference frequencies of |f|^p reach (p/2)*2R in j; an M > pR scan kills
  // every nonzero class modulo M
  auto sigma = static_cast<std::int64_t>(std::bit_ceil(static_cast<unsigned>(pexp) + 1u));
  std::int64_t Mt = sigma * static_cast<std::int64_t>(p.R);
  double cell = (static_cast<double>(p.R) / static_cast<double>(Mt));
  cell *= cell;
  double acc = 0.0;
  double half = pexp / 2.0;
  scan_rows(p, Mt, [&](std::int64_t, const std::complex<double>* row) {
    double s = 0.0;
    for (std::int64_t i = 0; i < Mt; ++i) s += std::pow(std::norm(row[i]), half);
    acc += s;
  });
  return std::pow(acc * cell, 1.0 / pexp);
}

double superlevel_measure(const SampledField& f, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("superlevel_measure: alpha must be >= 0");
  double a2 = alpha * alpha;
  std::int64_t count = (f.values.abs2() > a2).count();
  return static_cast<double>(count) * f.grid.cell_area();
}

double sup_norm(const SampledField& f) {
  return std::sqrt(f.values.abs2().maxCoeff());
}

double grid_sup_norm(const FrequencyProfile& p, std::int64_t sigma) {
  if (sigma < 1) throw std::invalid_argument("grid_sup_norm: sigma must be positive");
  std::int64_t Mt = sigma * static_cast<std::int64_t>(p.R);
  double best = 0.0;
  scan_rows(p, Mt, [&](std::int64_t, const std::complex<double>* row) {
    for (std::int64_t i = 0; i < Mt; ++i) best = std::max(best, std::norm(row[i]));
  });
  return std::sqrt(best);
}

void scan_rows(const FrequencyProfile& p, std::int64_t Mtilde,
               const std::function<void(std::int64_t, const std::complex<double>*)>& fn) {
  validate_profile(p);
  if (Mtilde <= 0 || (Mtilde & (Mtilde - 1)) != 0 || Mtilde % static_cast<std::int64_t>(p.R) != 0)
    throw std::invalid_argument("scan_rows: Mtilde must be a power-of-two multiple of R");
  const std::size_t n = p.entries.size();
  std::vector<std::complex<double>> cur(n), step(n);
  std::vector<std::int64_t> col(n), mmod(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = p.entries[i];
    col[i] = pos_mod(e.j, Mtilde);
    mmod[i] = pos_mod(e.m, Mtilde);
    cur[i] = e.a;
    step[i] = std::polar(1.0, kTwoPi * static_cast<double>(mmod[i]) / static_cast<double>(Mtilde));
  }
  std::vector<std::complex<double>> line(static_cast<std::size_t>(Mtilde));
  for (std::int64_t q = 0; q < Mtilde; ++q) {
    if (q > 0 && q % 64 == 0) {
      // re-polarize: rotating phasors drift by ~64 ulp between refreshes
      for (std::size_t i = 0; i < n; ++i) {
        std::int64_t ph = (mmod[i] * q) % Mtilde;
        cur[i] = p.entries[i].a *
                 std::polar(1.0, kTwoPi * static_cast<double>(ph) / static_cast<double>(Mtilde));
      }
    }
    std::fill(line.begin(), line.end(), std::complex<double>(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i) line[static_cast<std::size_t>(col[i])] += cur[i];
    fft_line_inplace(line.data(), Mtilde, +1);
    fn(q, line.data());
    for (std::size_t i = 0; i < n; ++i) cur[i] *= step[i];
  }
}

FamilyKind family_kind_from_string(const std::string& s) {
  if (s == "flat") return FamilyKind::flat;
  if (s == "random_phase") return FamilyKind::random_phase;
  if (s == "single_cap") return FamilyKind::single_cap;
  if (s == "block") return FamilyKind::block;
  if (s == "gaussian") return FamilyKind::gaussian;
  throw std::invalid_argument("unknown family kind: " + s);
}

std::string family_kind_to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::flat: return "flat";
    case FamilyKind::random_phase: return "random_phase";
    case FamilyKind::single_cap: return "single_cap";
    case FamilyKind::block: return "block";
    case FamilyKind::gaussian: return "gaussian";
  }
  throw std::logic_error("family_kind_to_string: bad enum");
}

double Rng::uniform() {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

std::array<double, 2> Rng::gauss() {
  // Box-Muller on raw engine words; std distributions are not bit-portable
  double u1 = (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = static_cast<double>(eng() >> 11) * 0x1.0p-53;
  double r = std::sqrt(-2.0 * std::log(u1));
  return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
}

std::uint64_t substream(std::uint64_t seed, const std::string& tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t z = seed ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<double> cap_sup_norms(const FrequencyProfile& p, const CapTree& tree) {
  validate_profile(p);
  const auto& ground = tree.levels.back();
  std::vector<double> sups(ground.size(), 0.0);
  auto Ri = static_cast<std::int64_t>(p.R);
  for (std::size_t ci = 0; ci < ground.size(); ++ci) {
    const Cap& cap = ground[ci];
    // gather the cap's entries and their bounding frequency box
    std::int64_t j0 = 0, j1 = 0, m0 = 0, m1 = 0;
    std::vector<const ProfileEntry*> sel;
    for (const auto& e : p.entries) {
      if (!cap.contains_xi1(e.j, p.R)) continue;
      if (sel.empty()) {
        j0 = j1 = e.j;
        m0 = m1 = e.m;
      } else {
        j0 = std::min(j0, e.j);
        j1 = std::max(j1, e.j);
        m0 = std::min(m0, e.m);
        m1 = std::max(m1, e.m);
      }
      sel.push_back(&e);
    }
    if (sel.empty()) continue;
    // zoomed sup on an 8x-oversampled box; sample spacing R/M divides the
    // standard 1/4 grid spacing because both M and 4R are powers of two
    auto pow2_lb = [](std::int64_t v) {
      return static_cast<std::int64_t>(std::bit_ceil(static_cast<std::uint64_t>(v)));
    };
    std::int64_t M1 = std::min(pow2_lb(8 * (j1 - j0 + 1)), 4 * Ri);
    std::int64_t M2 = std::min(pow2_lb(8 * (m1 - m0 + 1)), 4 * Ri);
    CArray box = CArray::Zero(static_cast<Eigen::Index>(M2), static_cast<Eigen::Index>(M1));
    for (const auto* e : sel)
      box(static_cast<Eigen::Index>(e->m - m0), static_cast<Eigen::Index>(e->j - j0)) += e->a;
    fft2_inplace(box, +1);
    sups[ci] = std::sqrt(box.abs2().maxCoeff());
  }
  return sups;
}

FrequencyProfile make_family(const FamilySpec& spec, std::uint64_t R, std::uint64_t seed) {
  auto lattice = build_lattice(R);
  FrequencyProfile p;
  p.R = R;

  std::string tag = family_kind_to_string(spec.kind) + "/R=" + std::to_string(R);
  if (spec.perturb > 0) tag += "/perturb=" + std::to_string(spec.perturb);
  Rng rng(substream(seed, tag));

  auto fill_random = [&](bool gaussian_amp) {
    std::vector<std::complex<double>> coef(lattice.size());
    for (int round = 0; round <= spec.perturb; ++round) {
      for (auto& c : coef) {
        if (gaussian_amp) {
          auto g = rng.gauss();
          c = std::complex<double>(g[0], g[1]) / std::numbers::sqrt2;
        } else {
          c = std::polar(1.0, kTwoPi * rng.uniform());
        }
      }
    }
    for (std::size_t i = 0; i < lattice.size(); ++i)
      p.entries.push_back({lattice[i].j, lattice[i].m, coef[i]});
  };

  switch (spec.kind) {
    case FamilyKind::flat:
      for (const auto& q : lattice) p.entries.push_back({q.j, q.m, {1.0, 0.0}});
      break;
    case FamilyKind::random_phase:
      fill_random(false);
      break;
    case FamilyKind::gaussian:
      fill_random(true);
      break;
    case FamilyKind::single_cap: {
      auto part = build_small_caps(R, spec.beta);
      int idx = spec.cap_index >= 0 ? spec.cap_index : static_cast<int>(part.caps.size() / 2);
      if (idx < 0 || idx >= static_cast<int>(part.caps.size()))
        throw std::invalid_argument("make_family: cap_index out of range");
      const Cap& cap = part.caps[static_cast<std::size_t>(idx)];
      for (const auto& q : lattice)
        if (cap.contains_xi1(q.j, R)) p.entries.push_back({q.j, q.m, {1.0, 0.0}});
      break;
    }
    case FamilyKind::block: {
      auto tree = build_cap_tree(build_scale_ladder(R));
      if (spec.block_level < 0 || spec.block_level >= static_cast<int>(tree.levels.size()))
        throw std::invalid_argument("make_family: block_level out of range");
      const auto& lvl = tree.levels[static_cast<std::size_t>(spec.block_level)];
      int idx = spec.block_index >= 0 ? spec.block_index : static_cast<int>(lvl.size() / 2);
      if (idx < 0 || idx >= static_cast<int>(lvl.size()))
        throw std::invalid_argument("make_family: block_index out of range");
      const Cap& cap = lvl[static_cast<std::size_t>(idx)];
      for (const auto& q : lattice)
        if (cap.contains_xi1(q.j, R)) p.entries.push_back({q.j, q.m, {1.0, 0.0}});
      break;
    }
  }

  if ((spec.kind == FamilyKind::flat || spec.kind == FamilyKind::single_cap ||
       spec.kind == FamilyKind::block) &&
      spec.perturb > 0) {
    for (auto& e : p.entries) e.a *= std::polar(1.0, kTwoPi * rng.uniform());
  }

  if (p.entries.empty()) throw std::runtime_error("make_family: empty coefficient set");

  auto tree = build_cap_tree(build_scale_ladder(R));
  auto sups = cap_sup_norms(p, tree);
  double mx = *std::max_element(sups.begin(), sups.end());
  if (!(mx > 0.0)) throw std::runtime_error("make_family: degenerate normalization");
  for (auto& e : p.entries) e.a /= mx;
  return p;
}

std::string profile_to_json(const FrequencyProfile& p) {
  nlohmann::ordered_json out;
  out["R"] = p.R;
  auto& arr = out["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : p.entries) arr.push_back({e.j, e.m, e.a.real(), e.a.imag()});
  return out.dump();
}

FrequencyProfile profile_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  FrequencyProfile p;
  p.R = j.at("R").get<std::uint64_t>();
  for (const auto& row : j.at("entries")) {
    if (!row.is_array() || row.size() != 4)
      throw std::invalid_argument("profile entries must be [j, m, re, im] quadruples");
    p.entries.push_back({row[0].get<std::int64_t>(), row[1].get<std::int64_t>(),
                         {row[2].get<double>(), row[3].get<double>()}});
  }
  validate_profile(p);
  return p;
}

void write_profile_json(const FrequencyProfile& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << profile_to_json(p) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

FrequencyProfile read_profile_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return profile_from_json(text);
}

void write_field_bin(const SampledField& f, const std::string& path) {
  static_assert(std::endian::native == std::endian::little, "field dump assumes little-endian");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const char magic[4] = {'D', 'C', 'P', 'L'};
  std::uint32_t version = 1;
  std::uint64_t R = f.grid.R, M = static_cast<std::uint64_t>(f.grid.M);
  out.write(magic, 4);
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&R), sizeof R);
  out.write(reinterpret_cast<const char*>(&M), sizeof M);
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(sizeof(std::complex<double>) * M * M));
  if (!out) throw std::runtime_error("write failed: " + path);
}

SampledField read_field_bin(const std::string& path) {
  static_assert(std::endian::native == std::endian::little, "field dump assumes little-endian");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t R = 0, M = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&R), sizeof R);
  in.read(reinterpret_cast<char*>(&M), sizeof M);
  if (!in || std::memcmp(magic, "DCPL", 4) != 0)
    throw std::runtime_error("bad field dump header: " + path);
  if (version != 1) throw std::runtime_error("unsupported field dump version");
  if (R == 0 || M == 0 || M % R != 0)
    throw std::runtime_error("bad field dump dimensions");
  SampledField f;
  f.grid = make_grid(R, M / R);
  f.values.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(sizeof(std::complex<double>) * M * M));
  if (!in) throw std::runtime_error("truncated field dump: " + path);
  return f;
}

}  // namespace dcpl
