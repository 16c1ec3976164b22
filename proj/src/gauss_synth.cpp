#include "surfacegrid/gauss_synth.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "surfacegrid/error.hpp"
#include "surfacegrid/rng.hpp"
#include "text_util.hpp"

namespace surfacegrid {

namespace {

constexpr double kPi = std::numbers::pi;

struct PreparedComponent {
  double mu_x, mu_y;
  double cos_r, sin_r;
  double inv_2sx2, inv_2sy2;
  double signed_amplitude;
};

PreparedComponent prepare(const GaussianComponent& c, double volume) {
  return {c.mu_x,
          c.mu_y,
          std::cos(c.rot),
          std::sin(c.rot),
          1.0 / (2.0 * c.sigma_x * c.sigma_x),
          1.0 / (2.0 * c.sigma_y * c.sigma_y),
          c.sign * c.amplitude(volume)};
}

inline double evaluate(const PreparedComponent& p, double x, double y) {
  const double dx = x - p.mu_x;
  const double dy = y - p.mu_y;
  // offset rotated by -rot
  const double xr = p.cos_r * dx + p.sin_r * dy;
  const double yr = -p.sin_r * dx + p.cos_r * dy;
  return p.signed_amplitude * std::exp(-(xr * xr * p.inv_2sx2 + yr * yr * p.inv_2sy2));
}

inline double evaluate_all(const std::vector<PreparedComponent>& comps, double x, double y) {
  double sum = 0.0;
  for (const auto& p : comps) sum += evaluate(p, x, y);
  return sum;
}

std::vector<PreparedComponent> prepare_all(const SurfaceFunction& f) {
  std::vector<PreparedComponent> out;
  out.reserve(f.components.size());
  for (const auto& c : f.components) out.push_back(prepare(c, f.volume));
  return out;
}

void check_resolution(int width, int height) {
  if (width <= 0 || height <= 0) throw RangeError("field resolution must be positive");
}

}  // namespace

void GaussianComponent::validate() const {
  auto in = [](double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; };
  if (!in(mu_x, 0.0, kDomainSize) || !in(mu_y, 0.0, kDomainSize))
    throw RangeError("component mean outside [0, 512]");
  if (!in(sigma_x, kMinSigma, kMaxSigma) || !in(sigma_y, kMinSigma, kMaxSigma))
    throw RangeError("component sigma outside [8, 512]");
  if (!(std::isfinite(rot) && rot >= 0.0 && rot < kPi))
    throw RangeError("component rotation outside [0, pi)");
  if (sign != 1 && sign != -1) throw RangeError("component sign must be +1 or -1");
}

double GaussianComponent::amplitude(double volume) const {
  return volume / (2.0 * kPi * sigma_x * sigma_y);
}

double GaussianComponent::value_at(double x, double y, double volume) const {
  return evaluate(prepare(*this, volume), x, y);
}

void SurfaceFunction::validate() const {
  if (components.empty() || components.size() > kMaxComponents)
    throw RangeError("function must have 1 to 10 components, got " +
                     std::to_string(components.size()));
  if (!(std::isfinite(volume) && volume > 0.0)) throw RangeError("volume must be positive");
  for (const auto& c : components) c.validate();
}

double SurfaceFunction::value_at(double x, double y) const {
  return evaluate_all(prepare_all(*this), x, y);
}

SurfaceFunction synth_function(std::uint64_t master_seed, std::int64_t id, double volume) {
  Rng rng(master_seed, static_cast<std::uint64_t>(id));
  SurfaceFunction f;
  f.id = id;
  f.volume = volume;
  const auto n = 1 + static_cast<int>(rng.below(kMaxComponents));
  f.components.reserve(n);
  for (int k = 0; k < n; ++k) {
    GaussianComponent c;
    c.mu_x = rng.uniform(0.0, kDomainSize);
    c.mu_y = rng.uniform(0.0, kDomainSize);
    c.sigma_x = rng.uniform(kMinSigma, kMaxSigma);
    c.sigma_y = rng.uniform(kMinSigma, kMaxSigma);
    c.rot = rng.uniform(0.0, kPi);
    c.sign = rng.coin() ? 1 : -1;
    f.components.push_back(c);
  }
  return f;
}

FieldGrid eval_function(const SurfaceFunction& f, int width, int height) {
  check_resolution(width, height);
  FieldGrid grid{width, height, std::vector<double>(static_cast<std::size_t>(width) * height)};
  const auto comps = prepare_all(f);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < height; ++i) {
    const double y = grid.world_y(i);
    for (int j = 0; j < width; ++j) grid.at(i, j) = evaluate_all(comps, grid.world_x(j), y);
  }
  return grid;
}

FieldGrid eval_function_serial(const SurfaceFunction& f, int width, int height) {
  check_resolution(width, height);
  FieldGrid grid{width, height, std::vector<double>(static_cast<std::size_t>(width) * height)};
  const auto comps = prepare_all(f);
  for (int i = 0; i < height; ++i)
    for (int j = 0; j < width; ++j)
      grid.at(i, j) = evaluate_all(comps, grid.world_x(j), grid.world_y(i));
  return grid;
}

FieldGrid rot90(const FieldGrid& field) {
  if (field.width != field.height) throw RangeError("rot90 needs a square field");
  const int n = field.width;
  FieldGrid out{n, n, std::vector<double>(field.values.size())};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) = field.at(n - 1 - j, i);
  return out;
}

std::string format_function(const SurfaceFunction& f) {
  std::string out = "surfacegrid-function 1\n";
  out += "function " + std::to_string(f.id) + " components " +
         std::to_string(f.components.size()) + " volume " + format_real(f.volume) + "\n";
  for (const auto& c : f.components) {
    out += format_real(c.mu_x) + ' ' + format_real(c.mu_y) + ' ' + format_real(c.sigma_x) + ' ' +
           format_real(c.sigma_y) + ' ' + format_real(c.rot) + ' ' + std::to_string(c.sign) + '\n';
  }
  return out;
}

SurfaceFunction parse_function(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_line() || split_ws(line) != std::vector<std::string>{"surfacegrid-function", "1"})
    throw FormatError(source, line_no, "magic", "expected 'surfacegrid-function 1'");

  if (!next_line()) throw FormatError(source, line_no + 1, "header", "missing function header");
  const auto head = split_ws(line);
  if (head.size() != 6 || head[0] != "function" || head[2] != "components" || head[4] != "volume")
    throw FormatError(source, line_no, "header",
                      "expected 'function <id> components <n> volume <V0>'");

  SurfaceFunction f;
  f.id = parse_int(head[1], source, line_no, "id");
  const auto count = parse_int(head[3], source, line_no, "components");
  f.volume = parse_real(head[5], source, line_no, "volume");
  if (f.id < 0) throw FormatError(source, line_no, "id", "must be non-negative");
  if (count < 1 || count > kMaxComponents)
    throw FormatError(source, line_no, "components",
                      "count " + std::to_string(count) + " outside [1, 10]");

  static const char* kFields[] = {"mu_x", "mu_y", "sigma_x", "sigma_y", "rot", "sign"};
  while (next_line()) {
    const auto tok = split_ws(line);
    if (static_cast<std::int64_t>(f.components.size()) == count)
      throw FormatError(source, line_no, "components",
                        "more component records than the declared " + std::to_string(count));
    if (tok.size() != 6)
      throw FormatError(source, line_no, "record",
                        "expected 6 fields, got " + std::to_string(tok.size()));
    GaussianComponent c;
    double* reals[] = {&c.mu_x, &c.mu_y, &c.sigma_x, &c.sigma_y, &c.rot};
    for (int k = 0; k < 5; ++k) *reals[k] = parse_real(tok[k], source, line_no, kFields[k]);
    c.sign = static_cast<int>(parse_int(tok[5], source, line_no, "sign"));
    try {
      c.validate();
    } catch (const RangeError& e) {
      std::string field = "record";
      if (c.mu_x < 0 || c.mu_x > kDomainSize) field = "mu_x";
      else if (c.mu_y < 0 || c.mu_y > kDomainSize) field = "mu_y";
      else if (!(c.sigma_x >= kMinSigma && c.sigma_x <= kMaxSigma)) field = "sigma_x";
      else if (!(c.sigma_y >= kMinSigma && c.sigma_y <= kMaxSigma)) field = "sigma_y";
      else if (!(c.rot >= 0 && c.rot < kPi)) field = "rot";
      else field = "sign";
      throw FormatError(source, line_no, field, e.what());
    }
    f.components.push_back(c);
  }
  if (static_cast<std::int64_t>(f.components.size()) != count)
    throw FormatError(source, line_no, "components",
                      "declared " + std::to_string(count) + " components, found " +
                          std::to_string(f.components.size()));
  if (!(std::isfinite(f.volume) && f.volume > 0.0))
    throw FormatError(source, 2, "volume", "must be positive");
  return f;
}

void save_function(const SurfaceFunction& f, const std::filesystem::path& path) {
  write_text_file(path, format_function(f));
}

SurfaceFunction load_function(const std::filesystem::path& path) {
  return parse_function(read_text_file(path), path.string());
}

}  // namespace surfacegrid
