#include "fermitherm/wiener_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fermitherm/errors.hpp"

namespace fermitherm {

namespace {

std::size_t int_pow(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

// Signed representative of j in [-N/2, N/2).
int signed_index(int j, int n) { return j < n / 2 ? j : j - n; }

int wrap_index(int x, int n) { return ((x % n) + n) % n; }

std::vector<Complex> twiddles(int n, int sign) {
  std::vector<Complex> tw(n);
  for (int t = 0; t < n; ++t) {
    const double angle = 2.0 * std::numbers::pi * t / n;
    tw[t] = Complex(std::cos(angle), sign * std::sin(angle));
  }
  // Exact values at the quarter points.
  tw[0] = Complex(1.0, 0.0);
  if (n % 2 == 0) tw[n / 2] = Complex(-1.0, 0.0);
  if (n % 4 == 0) {
    tw[n / 4] = Complex(0.0, sign);
    tw[3 * n / 4] = Complex(0.0, -sign);
  }
  return tw;
}

// In-place separable transform out[m] = sum_j in[j] exp(sign * 2 pi i m j / n)
// along every axis of an n^d array.
void dft_along_axes(std::vector<Complex>& data, int d, int n, int sign) {
  const auto tw = twiddles(n, sign);
  std::vector<Complex> line(n);
  std::vector<Complex> out(n);
  const std::size_t total = data.size();
  for (int axis = 0; axis < d; ++axis) {
    const std::size_t stride = int_pow(n, d - 1 - axis);
    const std::size_t block = stride * static_cast<std::size_t>(n);
    for (std::size_t outer = 0; outer < total; outer += block) {
      for (std::size_t inner = 0; inner < stride; ++inner) {
        const std::size_t base = outer + inner;
        for (int j = 0; j < n; ++j) line[j] = data[base + j * stride];
        for (int m = 0; m < n; ++m) {
          Complex acc(0.0, 0.0);
          for (int j = 0; j < n; ++j) {
            acc += line[j] * tw[(static_cast<long>(m) * j) % n];
          }
          out[m] = acc;
        }
        for (int m = 0; m < n; ++m) data[base + m * stride] = out[m];
      }
    }
  }
}

// Grid coordinates (first axis slowest) of a flat index.
std::vector<int> unflatten(std::size_t flat, int d, int n) {
  std::vector<int> idx(d);
  for (int a = d - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n);
    flat /= n;
  }
  return idx;
}

void require_grid(int grid_n) {
  if (grid_n <= 0 || grid_n % 2 != 0) {
    throw AliasingError("grid_n must be an even positive integer, got " +
                        std::to_string(grid_n));
  }
}

}  // namespace

int max_norm(const Offset& x) {
  int r = 0;
  for (int c : x) r = std::max(r, std::abs(c));
  return r;
}

LatticeKernel::LatticeKernel(int dimension, int radius, Entries entries)
    : dimension_(dimension), radius_(radius), entries_(std::move(entries)) {
  if (dimension_ <= 0) throw ConfigError("kernel dimension must be positive");
  if (radius_ < 0) throw ConfigError("kernel radius must be non-negative");
  for (const auto& [x, v] : entries_) {
    if (static_cast<int>(x.size()) != dimension_) {
      throw DimensionMismatch("kernel offset has " + std::to_string(x.size()) +
                              " components, expected " + std::to_string(dimension_));
    }
    if (max_norm(x) > radius_) {
      throw ConfigError("kernel offset outside declared radius " + std::to_string(radius_));
    }
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw ConfigError("kernel entry is not finite");
    }
  }
}

LatticeKernel LatticeKernel::constant(int dimension, Complex c) {
  return LatticeKernel(dimension, 0, {{Offset(dimension, 0), c}});
}

Complex LatticeKernel::at(const Offset& x) const {
  auto it = entries_.find(x);
  return it == entries_.end() ? Complex(0.0, 0.0) : it->second;
}

bool LatticeKernel::is_hermitian() const {
  for (const auto& [x, v] : entries_) {
    Offset minus(x.size());
    std::transform(x.begin(), x.end(), minus.begin(), [](int c) { return -c; });
    if (at(minus) != std::conj(v)) return false;
  }
  return true;
}

std::vector<Complex> LatticeKernel::dense_window() const {
  const int side = 2 * radius_ + 1;
  std::vector<Complex> window(int_pow(side, dimension_), Complex(0.0, 0.0));
  for (const auto& [x, v] : entries_) {
    std::size_t flat = 0;
    for (int c : x) flat = flat * side + static_cast<std::size_t>(c + radius_);
    window[flat] = v;
  }
  return window;
}

void to_json(nlohmann::json& j, const LatticeKernel& kernel) {
  auto entries = nlohmann::json::array();
  for (const auto& [x, v] : kernel.entries()) {
    entries.push_back({{"offset", x}, {"re", v.real()}, {"im", v.imag()}});
  }
  j = {{"dimension", kernel.dimension()}, {"radius", kernel.radius()}, {"entries", entries}};
}

LatticeKernel kernel_from_json(const nlohmann::json& j) {
  try {
    const int d = j.at("dimension").get<int>();
    const int r = j.at("radius").get<int>();
    LatticeKernel::Entries entries;
    for (const auto& e : j.at("entries")) {
      Offset x = e.at("offset").get<Offset>();
      const double re = e.at("re").get<double>();
      const double im = e.contains("im") ? e.at("im").get<double>() : 0.0;
      if (!entries.emplace(std::move(x), Complex(re, im)).second) {
        throw ConfigError("duplicate kernel offset");
      }
    }
    return LatticeKernel(d, r, std::move(entries));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed kernel JSON: ") + e.what());
  }
}

Symbol::Symbol(int dimension, int grid_n, std::vector<Complex> samples,
               std::optional<int> source_radius)
    : dimension_(dimension),
      grid_n_(grid_n),
      samples_(std::move(samples)),
      source_radius_(source_radius) {
  if (dimension_ <= 0) throw ConfigError("symbol dimension must be positive");
  require_grid(grid_n_);
  if (samples_.size() != int_pow(grid_n_, dimension_)) {
    throw DimensionMismatch("symbol sample count does not equal grid_n^d");
  }
}

Symbol Symbol::from_function(int dimension, int grid_n,
                             const std::function<double(std::span<const double>)>& f) {
  require_grid(grid_n);
  const std::size_t total = int_pow(grid_n, dimension);
  std::vector<Complex> samples(total);
  std::vector<double> k(dimension);
  for (std::size_t i = 0; i < total; ++i) {
    const auto idx = unflatten(i, dimension, grid_n);
    for (int a = 0; a < dimension; ++a) k[a] = grid_momentum(idx[a], grid_n);
    samples[i] = Complex(f(k), 0.0);
  }
  return Symbol(dimension, grid_n, std::move(samples));
}

bool Symbol::is_real() const {
  return std::all_of(samples_.begin(), samples_.end(),
                     [](const Complex& z) { return z.imag() == 0.0; });
}

std::vector<double> Symbol::real_samples() const {
  if (!is_real()) throw RangeError("symbol has non-zero imaginary samples");
  std::vector<double> out(samples_.size());
  std::transform(samples_.begin(), samples_.end(), out.begin(),
                 [](const Complex& z) { return z.real(); });
  return out;
}

Symbol Symbol::map_real(const std::function<double(double)>& f) const {
  const auto values = real_samples();
  std::vector<Complex> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(),
                 [&f](double v) { return Complex(f(v), 0.0); });
  return Symbol(dimension_, grid_n_, std::move(out));
}

std::vector<double> Symbol::momentum(std::size_t flat_index) const {
  const auto idx = unflatten(flat_index, dimension_, grid_n_);
  std::vector<double> k(dimension_);
  for (int a = 0; a < dimension_; ++a) k[a] = grid_momentum(idx[a], grid_n_);
  return k;
}

double Symbol::grid_momentum(int m, int grid_n) {
  return 2.0 * std::numbers::pi * m / grid_n - std::numbers::pi;
}

Symbol symbol_from_kernel(const LatticeKernel& kernel, int grid_n) {
  require_grid(grid_n);
  if (grid_n < 2 * kernel.radius() + 2) {
    throw AliasingError("grid_n " + std::to_string(grid_n) + " aliases a kernel of radius " +
                        std::to_string(kernel.radius()));
  }
  const int d = kernel.dimension();
  std::vector<Complex> data(int_pow(grid_n, d), Complex(0.0, 0.0));
  // exp(-i k x) = exp(-2 pi i m x / N) * (-1)^x for k = 2 pi m / N - pi.
  for (const auto& [x, v] : kernel.entries()) {
    std::size_t flat = 0;
    int parity = 0;
    for (int c : x) {
      flat = flat * grid_n + static_cast<std::size_t>(wrap_index(c, grid_n));
      parity += c;
    }
    data[flat] += (parity % 2 == 0) ? v : -v;
  }
  dft_along_axes(data, d, grid_n, -1);

  if (kernel.is_hermitian()) {
    const double scale = std::max(1.0, l1_norm(kernel));
    for (auto& z : data) {
      if (std::abs(z.imag()) > 1e-12 * scale) {
        throw RangeError("symbol of a Hermitian kernel has imaginary part " +
                         std::to_string(z.imag()));
      }
      z = Complex(z.real(), 0.0);
    }
  }
  return Symbol(d, grid_n, std::move(data), kernel.radius());
}

TruncatedKernel kernel_from_symbol(const Symbol& symbol, int radius, double tail_tol) {
  const int n = symbol.grid_n();
  const int d = symbol.dimension();
  if (radius < 0 || radius >= n / 2) {
    throw AliasingError("truncation radius " + std::to_string(radius) +
                        " must lie in [0, grid_n/2) for grid_n " + std::to_string(n));
  }
  std::vector<Complex> data = symbol.samples();
  dft_along_axes(data, d, n, +1);
  const double norm = 1.0 / static_cast<double>(data.size());

  LatticeKernel::Entries kept;
  double tail = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto idx = unflatten(i, d, n);
    Offset x(d);
    int parity = 0;
    for (int a = 0; a < d; ++a) {
      x[a] = signed_index(idx[a], n);
      parity += x[a];
    }
    const Complex value = ((parity % 2 == 0) ? data[i] : -data[i]) * norm;
    if (max_norm(x) <= radius) {
      kept.emplace(std::move(x), value);
    } else {
      tail += std::abs(value);
    }
  }

  if (symbol.is_real()) {
    LatticeKernel::Entries sym;
    for (const auto& [x, v] : kept) {
      Offset minus(x.size());
      std::transform(x.begin(), x.end(), minus.begin(), [](int c) { return -c; });
      sym.emplace(x, 0.5 * (v + std::conj(kept.at(minus))));
    }
    kept = std::move(sym);
  }
  if (tail > tail_tol) throw TailToleranceExceeded(tail, tail_tol);
  return {LatticeKernel(d, radius, std::move(kept)), tail};
}

LatticeKernel convolve(const LatticeKernel& a, const LatticeKernel& b) {
  if (a.dimension() != b.dimension()) {
    throw DimensionMismatch("cannot convolve kernels of dimension " +
                            std::to_string(a.dimension()) + " and " +
                            std::to_string(b.dimension()));
  }
  LatticeKernel::Entries out;
  Offset x(a.dimension());
  for (const auto& [xa, va] : a.entries()) {
    for (const auto& [xb, vb] : b.entries()) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = xa[i] + xb[i];
      out[x] += va * vb;
    }
  }
  return LatticeKernel(a.dimension(), a.radius() + b.radius(), std::move(out));
}

double l1_norm(const LatticeKernel& kernel) {
  double sum = 0.0;
  for (const auto& [x, v] : kernel.entries()) sum += std::abs(v);
  return sum;
}

RegularityReport check_regularity(const LatticeKernel& kernel, int grid_n) {
  if (!kernel.is_hermitian()) {
    throw NonHermitianKernel("covariance kernel is not Hermitian");
  }
  const auto values = symbol_from_kernel(kernel, grid_n).real_samples();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  RegularityReport report;
  report.min_value = *lo;
  report.max_value = *hi;
  report.l1_norm = l1_norm(kernel);
  report.margin = std::min(report.min_value, 1.0 - report.max_value);
  report.is_regular = report.min_value > 0.0 && report.max_value < 1.0;
  return report;
}

TruncatedKernel compose_wiener_levy(const LatticeKernel& cov, int grid_n, int radius,
                                    double tail_tol) {
  const auto report = check_regularity(cov, grid_n);
  if (!report.is_regular) {
    throw NotRegular("covariance symbol range [" + std::to_string(report.min_value) + ", " +
                     std::to_string(report.max_value) + "] is not inside ]0,1[");
  }
  const Symbol h_symbol = symbol_from_kernel(cov, grid_n).map_real([](double c) {
    if (!(c > 0.0 && c < 1.0)) throw RangeError("covariance sample outside ]0,1[");
    return std::log(1.0 - c) - std::log(c);
  });
  return kernel_from_symbol(h_symbol, radius, tail_tol);
}

}  // namespace fermitherm
