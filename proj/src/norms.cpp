#include "eulab/norms.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace eulab {

namespace {

// Half-spectrum view shared by the raster and SpectralField2D entry points.
struct Spectrum {
  std::vector<int> shape;
  double k0;
  double cell;       // h^d
  double n_points;   // N
  std::span<const Complex> coeffs;
};

// Calls fn(flat_index, |xi|, weight) for every stored coefficient, where the
// weight accounts for the conjugate half that is not stored.
template <typename Fn>
void for_each_mode(const std::vector<int>& shape, double k0, Fn&& fn) {
  const int d = static_cast<int>(shape.size());
  const int nl = shape.back();
  const int hl = nl / 2 + 1;
  auto signed_mode = [](int idx, int n) { return idx < n / 2 ? idx : idx - n; };
  auto weight = [&](int b) { return (b == 0 || (nl % 2 == 0 && b == nl / 2)) ? 1.0 : 2.0; };
  std::size_t flat = 0;
  if (d == 2) {
    for (int a = 0; a < shape[0]; ++a) {
      const double ka = k0 * signed_mode(a, shape[0]);
      for (int b = 0; b < hl; ++b, ++flat) fn(flat, std::sqrt(ka * ka + k0 * k0 * b * b), weight(b));
    }
  } else {
    for (int a = 0; a < shape[0]; ++a) {
      const double ka = k0 * signed_mode(a, shape[0]);
      for (int c = 0; c < shape[1]; ++c) {
        const double kc = k0 * signed_mode(c, shape[1]);
        for (int b = 0; b < hl; ++b, ++flat)
          fn(flat, std::sqrt(ka * ka + kc * kc + k0 * k0 * b * b), weight(b));
      }
    }
  }
}

double sobolev_from_spectrum(const Spectrum& sp, double s, bool homogeneous) {
  if (homogeneous && s < 0.0) {
    double total = 0.0;
    for_each_mode(sp.shape, sp.k0, [&](std::size_t i, double, double w) { total += w * std::norm(sp.coeffs[i]); });
    if (std::abs(sp.coeffs[0]) > 1e-12 * std::sqrt(total))
      throw ValidationError("sobolev_norm: negative-order homogeneous norm needs a mean-zero field");
  }
  double acc = 0.0;
  for_each_mode(sp.shape, sp.k0, [&](std::size_t i, double k, double w) {
    double weight;
    if (homogeneous) {
      if (k == 0.0) return;
      weight = s == 0.0 ? 1.0 : std::pow(k, 2.0 * s);
    } else {
      weight = std::pow(1.0 + k * k, s);
    }
    acc += w * weight * std::norm(sp.coeffs[i]);
  });
  return std::sqrt(sp.cell / sp.n_points * acc);
}

void require_dyadic(double N) {
  int e = 0;
  if (!(N > 0.0) || !std::isfinite(N) || std::frexp(N, &e) != 0.5)
    throw ValidationError("lp_projection: N must be a power of two");
}

void require_band_in_range(double N, double k0, double kmax) {
  require_dyadic(N);
  if (N / 2.0 >= kmax || 2.0 * N <= k0) {
    std::ostringstream os;
    os << "lp_projection: N = " << N << " outside the resolvable range (" << k0 / 2.0 << ", " << 2.0 * kmax << ")";
    throw ValidationError(os.str());
  }
}

std::vector<double> bands_for(double k0, double kmax) {
  std::vector<double> out;
  const int jlo = static_cast<int>(std::floor(std::log2(k0 / 2.0)));
  const int jhi = static_cast<int>(std::ceil(std::log2(2.0 * kmax)));
  for (int j = jlo; j <= jhi; ++j) {
    const double N = std::ldexp(1.0, j);
    if (N / 2.0 < kmax && 2.0 * N > k0) out.push_back(N);
  }
  return out;
}

std::vector<Complex> project(const Spectrum& sp, double N) {
  std::vector<Complex> out(sp.coeffs.size());
  for_each_mode(sp.shape, sp.k0, [&](std::size_t i, double k, double) { out[i] = lp_band_symbol(k, N) * sp.coeffs[i]; });
  return out;
}

double corner_wavenumber(const std::vector<int>& shape, double k0) {
  double acc = 0.0;
  for (int n : shape) acc += std::pow(k0 * (n / 2), 2);
  return std::sqrt(acc);
}

Spectrum spectrum_of(const SpectralField2D& f) {
  const auto& g = f.grid();
  return {{g.n(), g.n()}, g.k0(), g.cell_area(), static_cast<double>(g.n()) * g.n(),
          std::span<const Complex>(f.coeffs().data(), f.coeffs().size())};
}

double aggregate(const std::vector<BandValue>& bands, double q) {
  if (std::isinf(q)) {
    double m = 0.0;
    for (const auto& b : bands) m = std::max(m, b.value);
    return m;
  }
  double acc = 0.0;
  for (const auto& b : bands) acc += std::pow(b.value, q);
  return std::pow(acc, 1.0 / q);
}

void check_exponents(double p, double q) {
  if (!(p >= 1.0) || !(q >= 1.0)) throw ValidationError("besov_norm: need 1 <= p, q <= inf");
}

}  // namespace

double PeriodicRaster::cell_volume() const { return std::pow(spacing(), dim()); }

double PeriodicRaster::max_wavenumber() const { return corner_wavenumber(shape, k0()); }

PeriodicRaster PeriodicRaster::from(const SpectralField2D& f) {
  const auto& v = f.values();
  return {{f.grid().n(), f.grid().n()}, f.grid().box_length(), Eigen::Map<const Eigen::ArrayXd>(v.data(), v.size())};
}

double lp_cutoff(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double a = std::exp(-1.0 / (2.0 - r));
  const double b = std::exp(-1.0 / (r - 1.0));
  return a / (a + b);
}

double lp_band_symbol(double xi, double N) { return lp_cutoff(xi / N) - lp_cutoff(2.0 * xi / N); }

std::vector<double> dyadic_bands(const PeriodicRaster& f) { return bands_for(f.k0(), f.max_wavenumber()); }

double lp_norm(std::span<const double> values, double cell, double p) {
  if (!(p >= 1.0)) throw ValidationError("lp_norm: need p >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  double acc = 0.0;
  if (p == 2.0) {
    for (double v : values) acc += v * v;
    return std::sqrt(acc * cell);
  }
  for (double v : values) acc += std::pow(std::abs(v), p);
  return std::pow(acc * cell, 1.0 / p);
}

double lp_norm(const PeriodicRaster& f, double p) {
  return lp_norm(std::span<const double>(f.values.data(), f.values.size()), f.cell_volume(), p);
}

double lp_norm(const SpectralField2D& f, double p) {
  const auto& v = f.values();
  return lp_norm(std::span<const double>(v.data(), v.size()), f.grid().cell_area(), p);
}

PeriodicRaster lp_projection(const PeriodicRaster& f, double N) {
  require_band_in_range(N, f.k0(), f.max_wavenumber());
  auto& fft = fft_for(f.shape);
  std::vector<Complex> c(fft.complex_size());
  fft.forward(std::span<const double>(f.values.data(), f.values.size()), c);
  Spectrum sp{f.shape, f.k0(), f.cell_volume(), static_cast<double>(fft.real_size()), c};
  auto pc = project(sp, N);
  PeriodicRaster out{f.shape, f.box_length, Eigen::ArrayXd(f.values.size())};
  fft.backward(pc, std::span<double>(out.values.data(), out.values.size()));
  return out;
}

SpectralField2D lp_projection(const SpectralField2D& f, double N) {
  const auto& g = f.grid();
  require_band_in_range(N, g.k0(), corner_wavenumber({g.n(), g.n()}, g.k0()));
  auto pc = project(spectrum_of(f), N);
  ComplexArray2 c = Eigen::Map<ComplexArray2>(pc.data(), g.n(), g.half());
  return SpectralField2D::from_coeffs(g, std::move(c));
}

double sobolev_norm(const PeriodicRaster& f, double s, bool homogeneous) {
  auto& fft = fft_for(f.shape);
  std::vector<Complex> c(fft.complex_size());
  fft.forward(std::span<const double>(f.values.data(), f.values.size()), c);
  return sobolev_from_spectrum({f.shape, f.k0(), f.cell_volume(), static_cast<double>(fft.real_size()), c}, s,
                               homogeneous);
}

double sobolev_norm(const SpectralField2D& f, double s, bool homogeneous) {
  return sobolev_from_spectrum(spectrum_of(f), s, homogeneous);
}

BesovResult besov_norm(const PeriodicRaster& f, double s, double p, double q, bool homogeneous) {
  check_exponents(p, q);
  auto& fft = fft_for(f.shape);
  std::vector<Complex> c(fft.complex_size());
  fft.forward(std::span<const double>(f.values.data(), f.values.size()), c);
  Spectrum sp{f.shape, f.k0(), f.cell_volume(), static_cast<double>(fft.real_size()), c};
  BesovResult r;
  std::vector<double> piece(fft.real_size());
  for (double N : dyadic_bands(f)) {
    auto pc = project(sp, N);
    fft.backward(pc, piece);
    r.band_profile.push_back({N, std::pow(N, s) * lp_norm(piece, sp.cell, p)});
  }
  r.value = aggregate(r.band_profile, q);
  if (!homogeneous) r.value += lp_norm(f, p);
  return r;
}

BesovResult besov_norm(const SpectralField2D& f, double s, double p, double q, bool homogeneous) {
  return besov_norm(PeriodicRaster::from(f), s, p, q, homogeneous);
}

double lorentz_norm(std::span<const double> values, std::span<const double> measure, double p, double q) {
  if (values.size() != measure.size()) throw ValidationError("lorentz_norm: values/measure size mismatch");
  if (!(p > 1.0) || std::isinf(p)) throw ValidationError("lorentz_norm: need 1 < p < inf");
  if (!(q >= 1.0)) throw ValidationError("lorentz_norm: need 1 <= q <= inf");
  std::vector<std::size_t> order;
  order.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] != 0.0) order.push_back(i);
  // Ties broken by value then index so the result is independent of input order.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double va = std::abs(values[a]), vb = std::abs(values[b]);
    if (va != vb) return va > vb;
    return measure[a] < measure[b];
  });
  double m_prev = 0.0;
  double acc = 0.0;
  const double r = q / p;
  for (std::size_t idx : order) {
    const double v = std::abs(values[idx]);
    const double m = m_prev + measure[idx];
    if (std::isinf(q)) {
      acc = std::max(acc, v * std::pow(m, 1.0 / p));
    } else {
      acc += std::pow(v, q) * (std::pow(m, r) - std::pow(m_prev, r)) / r;
    }
    m_prev = m;
  }
  return std::isinf(q) ? acc : std::pow(acc, 1.0 / q);
}

double lorentz_norm(std::span<const double> values, double cell, double p, double q) {
  std::vector<double> measure(values.size(), cell);
  return lorentz_norm(values, measure, p, q);
}

double lorentz_norm(const PeriodicRaster& f, double p, double q) {
  return lorentz_norm(std::span<const double>(f.values.data(), f.values.size()), f.cell_volume(), p, q);
}

double lorentz_norm(const SpectralField2D& f, double p, double q) {
  const auto& v = f.values();
  return lorentz_norm(std::span<const double>(v.data(), v.size()), f.grid().cell_area(), p, q);
}

double gradient_lp_norm(const SpectralField2D& f, double p) {
  const RealArray2 g1 = derivative(f, 1).values();
  const RealArray2 g2 = derivative(f, 2).values();
  const RealArray2 mag = (g1.square() + g2.square()).sqrt();
  return lp_norm(std::span<const double>(mag.data(), mag.size()), f.grid().cell_area(), p);
}

double riesz_interp_check(const SpectralField2D& f) {
  if (f.max_abs() == 0.0) throw ValidationError("riesz_interp_check: zero field");
  const double num = riesz(f, 1, 1).max_abs();
  const double den = std::sqrt(lp_norm(f, 2.0)) * std::sqrt(gradient_lp_norm(f, kInf));
  return num / den;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string NormDescriptor::key() const {
  std::string out;
  switch (kind) {
    case Kind::Lebesgue:
      return "L:p=" + format_number(p);
    case Kind::Sobolev:
      return std::string(homogeneous ? "Hdot" : "H") + ":s=" + format_number(s);
    case Kind::Besov:
      return std::string(homogeneous ? "Bdot" : "B") + ":s=" + format_number(s) + ":p=" + format_number(p) +
             ":q=" + format_number(q);
    case Kind::Lorentz:
      return "Lorentz:p=" + format_number(p) + ":q=" + format_number(q);
  }
  return out;
}

NormDescriptor NormDescriptor::parse(const std::string& key) {
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty()) throw ValidationError("norm key: empty");
  NormDescriptor d{};
  const std::string& head = parts[0];
  if (head == "L") d.kind = Kind::Lebesgue;
  else if (head == "Hdot" || head == "H") d.kind = Kind::Sobolev, d.homogeneous = head == "Hdot";
  else if (head == "Bdot" || head == "B") d.kind = Kind::Besov, d.homogeneous = head == "Bdot";
  else if (head == "Lorentz") d.kind = Kind::Lorentz;
  else throw ValidationError("norm key: unknown kind '" + head + "'");
  bool seen_s = false, seen_p = false, seen_q = false;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) throw ValidationError("norm key: malformed part '" + parts[i] + "'");
    const std::string name = parts[i].substr(0, eq);
    const std::string text = parts[i].substr(eq + 1);
    double value;
    if (text == "inf") {
      value = kInf;
    } else {
      auto res = std::from_chars(text.data(), text.data() + text.size(), value);
      if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ValidationError("norm key: bad number '" + text + "'");
    }
    if (name == "s") d.s = value, seen_s = true;
    else if (name == "p") d.p = value, seen_p = true;
    else if (name == "q") d.q = value, seen_q = true;
    else throw ValidationError("norm key: unknown parameter '" + name + "'");
  }
  const bool ok = (d.kind == Kind::Lebesgue && seen_p && !seen_s && !seen_q) ||
                  (d.kind == Kind::Sobolev && seen_s && !seen_p && !seen_q) ||
                  (d.kind == Kind::Besov && seen_s && seen_p && seen_q) ||
                  (d.kind == Kind::Lorentz && seen_p && seen_q && !seen_s);
  if (!ok) throw ValidationError("norm key: wrong parameters for '" + key + "'");
  return d;
}

double NormReport::at(const std::string& key) const {
  auto it = entries.find(key);
  if (it == entries.end()) throw ValidationError("NormReport: no entry '" + key + "'");
  return it->second;
}

nlohmann::json NormReport::to_json() const {
  nlohmann::json j;
  j["format_version"] = 1;
  j["time"] = time;
  j["entries"] = nlohmann::json::object();
  for (const auto& [k, v] : entries) j["entries"][k] = v;
  j["band_profiles"] = nlohmann::json::object();
  for (const auto& [k, bands] : band_profiles) {
    auto arr = nlohmann::json::array();
    for (const auto& b : bands) arr.push_back({b.N, b.value});
    j["band_profiles"][k] = arr;
  }
  return j;
}

NormReport NormReport::from_json(const nlohmann::json& j) {
  NormReport r;
  r.time = j.at("time").get<double>();
  for (const auto& [k, v] : j.at("entries").items()) r.entries[k] = v.get<double>();
  if (j.contains("band_profiles"))
    for (const auto& [k, arr] : j.at("band_profiles").items())
      for (const auto& b : arr) r.band_profiles[k].push_back({b.at(0).get<double>(), b.at(1).get<double>()});
  return r;
}

NormReport analyze(const PeriodicRaster& f, const std::vector<NormDescriptor>& which, double time) {
  NormReport r;
  r.time = time;
  for (const auto& d : which) {
    switch (d.kind) {
      case NormDescriptor::Kind::Lebesgue:
        r.add(d, lp_norm(f, d.p));
        break;
      case NormDescriptor::Kind::Sobolev:
        r.add(d, sobolev_norm(f, d.s, d.homogeneous));
        break;
      case NormDescriptor::Kind::Besov: {
        auto b = besov_norm(f, d.s, d.p, d.q, d.homogeneous);
        r.add(d, b.value);
        r.band_profiles[d.key()] = std::move(b.band_profile);
        break;
      }
      case NormDescriptor::Kind::Lorentz:
        r.add(d, lorentz_norm(f, d.p, d.q));
        break;
    }
  }
  return r;
}

NormReport analyze(const SpectralField2D& f, const std::vector<NormDescriptor>& which, double time) {
  return analyze(PeriodicRaster::from(f), which, time);
}

}  // namespace eulab
