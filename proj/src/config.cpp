#include "fermitherm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "fermitherm/errors.hpp"

namespace fermitherm {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get(const json& j, const char* key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

double get_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number");
  return j.at(key).get<double>();
}

int get_int(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) {
    throw ConfigError(std::string("config key '") + key + "' must be an integer");
  }
  return j.at(key).get<int>();
}

std::vector<int> get_int_list(const json& j, const char* key, std::vector<int> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array()) throw ConfigError(std::string("config key '") + key + "' must be a list of integers");
  std::vector<int> out;
  for (const auto& x : v) {
    if (!x.is_number_integer()) {
      throw ConfigError(std::string("config key '") + key + "' must be a list of integers");
    }
    out.push_back(x.get<int>());
  }
  return out;
}

Complex matrix_entry(const json& x) {
  if (x.is_number()) return {x.get<double>(), 0.0};
  if (x.is_array() && x.size() == 2 && x[0].is_number() && x[1].is_number()) {
    return {x[0].get<double>(), x[1].get<double>()};
  }
  throw ConfigError("matrix entries must be numbers or [re, im] pairs");
}

Eigen::MatrixXcd matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) throw ConfigError("covariance matrix must be a non-empty list of rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = rows[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw ConfigError("covariance matrix must be square");
    }
    for (Eigen::Index k = 0; k < n; ++k) m(i, k) = matrix_entry(row[k]);
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      if (m(i, k).imag() == 0.0) {
        row.push_back(m(i, k).real());
      } else {
        row.push_back(json::array({m(i, k).real(), m(i, k).imag()}));
      }
    }
    rows.push_back(row);
  }
  return rows;
}

void require_increasing(const std::vector<int>& v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0) throw ConfigError(std::string(what) + " entries must be non-negative");
    if (i > 0 && v[i] <= v[i - 1]) throw ConfigError(std::string(what) + " must be strictly increasing");
  }
}

long long cube_volume(int dimension, int half_width) {
  long long v = 1;
  for (int i = 0; i < dimension; ++i) v *= 2LL * half_width + 1;
  return v;
}

}  // namespace

void validate(const StudyConfig& c) {
  if (c.dimension < 1 || c.dimension > 3) throw ConfigError("dimension must be 1, 2 or 3");
  if (c.grid_n < 2 || c.grid_n % 2 != 0) throw ConfigError("grid_n must be an even integer >= 2");
  if (c.radius < 0) throw ConfigError("radius must be non-negative");
  if (!(c.tail_tol > 0.0)) throw ConfigError("tail_tol must be positive");
  if (!std::isfinite(c.im_z)) throw ConfigError("im_z must be finite");
  if (c.fock_cap < 1 || c.fock_cap > 16) throw ConfigError("fock_cap must lie in 1..16");
  require_increasing(c.one_particle_L, "one_particle_L");
  require_increasing(c.many_body_L, "many_body_L");

  const auto& cov = c.covariance;
  switch (cov.family) {
    case CovarianceSpec::Family::Constant:
      if (!std::isfinite(cov.c)) throw ConfigError("covariance.c must be finite");
      break;
    case CovarianceSpec::Family::Trig:
      if (!std::isfinite(cov.a)) throw ConfigError("covariance.a must be finite");
      break;
    case CovarianceSpec::Family::FermiDirac:
      if (!std::isfinite(cov.beta) || !std::isfinite(cov.mu)) {
        throw ConfigError("covariance.beta and covariance.mu must be finite");
      }
      break;
    case CovarianceSpec::Family::Kernel:
      if (!cov.kernel) throw ConfigError("covariance family 'kernel' needs a kernel");
      if (cov.kernel->dimension() != c.dimension) {
        throw ConfigError("covariance kernel dimension differs from config dimension");
      }
      break;
  }

  const auto& m = c.maxent;
  if (!(m.tol > 0.0)) throw ConfigError("maxent.tol must be positive");
  if (m.max_iter < 1) throw ConfigError("maxent.max_iter must be positive");
  if (m.perturbed_states < 0) throw ConfigError("maxent.perturbed_states must be non-negative");
  if (m.max_sites < 0) throw ConfigError("maxent.max_sites must be non-negative");
  for (int n : m.site_counts) {
    if (n < 1) throw ConfigError("maxent.site_counts entries must be positive");
  }
  for (const auto& mat : m.covariances) {
    if (mat.rows() < 1) throw ConfigError("maxent covariance matrices must be non-empty");
  }
  if (c.output.empty() || c.output.find('/') != std::string::npos) {
    throw ConfigError("output must be a plain file stem");
  }

  // Many-body sizes are checked last so that a malformed config reports the
  // malformation first.
  for (int L : c.many_body_L) {
    const long long n = cube_volume(c.dimension, L);
    if (n > c.fock_cap) {
      throw BoxTooLarge("many-body box L=" + std::to_string(L) + " has " + std::to_string(n) +
                        " sites, above fock_cap " + std::to_string(c.fock_cap));
    }
  }
  for (int n : m.site_counts) {
    if (n > c.fock_cap) {
      throw BoxTooLarge("maxent site count " + std::to_string(n) + " exceeds fock_cap " +
                        std::to_string(c.fock_cap));
    }
  }
  for (const auto& mat : m.covariances) {
    if (mat.rows() > c.fock_cap) {
      throw BoxTooLarge("maxent covariance of size " + std::to_string(mat.rows()) +
                        " exceeds fock_cap " + std::to_string(c.fock_cap));
    }
  }
}

StudyConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j, {"covariance", "dimension", "grid_n", "radius", "tail_tol", "one_particle_L",
                     "many_body_L", "fock_cap", "im_z", "maxent", "output"},
                 "config");
  StudyConfig c;
  c.dimension = get_int(j, "dimension", 1);
  if (c.dimension < 1 || c.dimension > 3) throw ConfigError("dimension must be 1, 2 or 3");
  c.grid_n = get_int(j, "grid_n", defaults::grid_n(c.dimension));
  c.radius = get_int(j, "radius", defaults::radius(c.dimension));
  c.tail_tol = get_number(j, "tail_tol", defaults::kTailTol);
  c.one_particle_L = get_int_list(j, "one_particle_L", defaults::one_particle_L());
  c.many_body_L = get_int_list(j, "many_body_L", defaults::many_body_L());
  c.fock_cap = get_int(j, "fock_cap", defaults::kFockCap);
  c.im_z = get_number(j, "im_z", defaults::kImZ);
  c.output = get<std::string>(j, "output", "study");

  if (!j.contains("covariance")) throw ConfigError("config needs a 'covariance' section");
  const json& cov = j.at("covariance");
  if (!cov.is_object()) throw ConfigError("'covariance' must be an object");
  const std::string family = get<std::string>(cov, "family", "");
  if (family == "constant") {
    reject_unknown(cov, {"family", "c"}, "covariance");
    c.covariance.family = CovarianceSpec::Family::Constant;
    c.covariance.c = get_number(cov, "c", 0.5);
  } else if (family == "trig") {
    reject_unknown(cov, {"family", "a"}, "covariance");
    c.covariance.family = CovarianceSpec::Family::Trig;
    c.covariance.a = get_number(cov, "a", 0.25);
  } else if (family == "fermi_dirac") {
    reject_unknown(cov, {"family", "beta", "mu"}, "covariance");
    c.covariance.family = CovarianceSpec::Family::FermiDirac;
    c.covariance.beta = get_number(cov, "beta", 1.0);
    c.covariance.mu = get_number(cov, "mu", 0.0);
  } else if (family == "kernel") {
    reject_unknown(cov, {"family", "kernel"}, "covariance");
    if (!cov.contains("kernel")) throw ConfigError("covariance family 'kernel' needs a 'kernel' entry");
    c.covariance.family = CovarianceSpec::Family::Kernel;
    c.covariance.kernel = kernel_from_json(cov.at("kernel"));
  } else {
    throw ConfigError("unknown covariance family '" + family +
                      "' (expected constant, trig, fermi_dirac or kernel)");
  }

  if (j.contains("maxent")) {
    const json& m = j.at("maxent");
    if (!m.is_object()) throw ConfigError("'maxent' must be an object");
    reject_unknown(m, {"tol", "max_iter", "site_counts", "perturbed_states", "seed", "max_sites",
                       "covariances"},
                   "maxent");
    c.maxent.tol = get_number(m, "tol", defaults::kMaxEntTol);
    c.maxent.max_iter = get_int(m, "max_iter", defaults::kMaxEntMaxIter);
    c.maxent.site_counts = get_int_list(m, "site_counts", defaults::maxent_site_counts());
    c.maxent.perturbed_states = get_int(m, "perturbed_states", defaults::kPerturbedStates);
    c.maxent.seed = get<std::uint64_t>(m, "seed", defaults::kSeed);
    c.maxent.max_sites = get_int(m, "max_sites", defaults::kMaxEntMaxSites);
    if (m.contains("covariances")) {
      if (!m.at("covariances").is_array()) throw ConfigError("maxent.covariances must be a list");
      for (const auto& mat : m.at("covariances")) c.maxent.covariances.push_back(matrix_from_json(mat));
    }
  }

  validate(c);
  return c;
}

json config_to_json(const StudyConfig& c) {
  json cov;
  switch (c.covariance.family) {
    case CovarianceSpec::Family::Constant:
      cov = {{"family", "constant"}, {"c", c.covariance.c}};
      break;
    case CovarianceSpec::Family::Trig:
      cov = {{"family", "trig"}, {"a", c.covariance.a}};
      break;
    case CovarianceSpec::Family::FermiDirac:
      cov = {{"family", "fermi_dirac"}, {"beta", c.covariance.beta}, {"mu", c.covariance.mu}};
      break;
    case CovarianceSpec::Family::Kernel:
      cov = {{"family", "kernel"}, {"kernel", *c.covariance.kernel}};
      break;
  }
  json covariances = json::array();
  for (const auto& m : c.maxent.covariances) covariances.push_back(matrix_to_json(m));
  return {
      {"covariance", cov},
      {"dimension", c.dimension},
      {"grid_n", c.grid_n},
      {"radius", c.radius},
      {"tail_tol", c.tail_tol},
      {"one_particle_L", c.one_particle_L},
      {"many_body_L", c.many_body_L},
      {"fock_cap", c.fock_cap},
      {"im_z", c.im_z},
      {"maxent",
       {{"tol", c.maxent.tol},
        {"max_iter", c.maxent.max_iter},
        {"site_counts", c.maxent.site_counts},
        {"perturbed_states", c.maxent.perturbed_states},
        {"seed", c.maxent.seed},
        {"max_sites", c.maxent.max_sites},
        {"covariances", covariances}}},
      {"output", c.output},
  };
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override key '" + path + "' has an empty component");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("override key '" + path + "' descends into a non-object");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config file '" + path + "' is not valid JSON");
  return j;
}

}  // namespace fermitherm
