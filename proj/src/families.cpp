#include "morseig/families.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>

namespace morseig {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;
using json = nlohmann::json;
using cd = std::complex<double>;

MatrixXcd pauli(char which) {
  MatrixXcd s(2, 2);
  switch (which) {
    case 'x': s << 0, 1, 1, 0; break;
    case 'y': s << 0, cd(0, -1), cd(0, 1), 0; break;
    case 'z': s << 1, 0, 0, -1; break;
    default: throw std::logic_error("pauli");
  }
  return s;
}

bool entrywise_real(const MatrixXcd& A, double tol) {
  return A.imag().cwiseAbs().maxCoeff() <= tol;
}

bool symmetric(const MatrixXd& A, double tol) {
  return (A - A.transpose()).cwiseAbs().maxCoeff() <= tol;
}

// Canonical harmonic: zero vector is "constant"; otherwise the first
// nonzero component must be positive.
int harmonic_sign(const VectorXi& m) {
  for (int j = 0; j < m.size(); ++j) {
    if (m[j] > 0) return 1;
    if (m[j] < 0) return -1;
  }
  return 0;
}

double uniform01(std::mt19937_64& rng) {
  // 53-bit mantissa; fully specified by the engine, so reproducible
  // across standard libraries.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform_pm(std::mt19937_64& rng, double amplitude) {
  return amplitude * (2.0 * uniform01(rng) - 1.0);
}

MatrixXd parse_real_matrix(const json& rows, int n, const char* what) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != n)
    throw std::invalid_argument(std::string("family spec: ") + what + " must be a " +
                                std::to_string(n) + "x" + std::to_string(n) + " array");
  MatrixXd out(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw std::invalid_argument(std::string("family spec: ragged matrix in ") + what);
    for (int j = 0; j < n; ++j) {
      const auto& v = row[static_cast<std::size_t>(j)];
      if (!v.is_number())
        throw std::invalid_argument(std::string("family spec: non-number entry in ") + what);
      out(i, j) = v.get<double>();
    }
  }
  return out;
}

MatrixXcd parse_coeff(const json& obj, int n, const char* what) {
  for (const auto& item : obj.items())
    if (item.key() != "re" && item.key() != "im" && item.key() != "m")
      throw std::invalid_argument("family spec: unknown key \"" + item.key() + "\" in " + what);
  if (!obj.contains("re"))
    throw std::invalid_argument(std::string("family spec: missing \"re\" in ") + what);
  MatrixXd re = parse_real_matrix(obj.at("re"), n, what);
  MatrixXd im = MatrixXd::Zero(n, n);
  if (obj.contains("im")) im = parse_real_matrix(obj.at("im"), n, what);
  return re + cd(0, 1) * im;
}

json dump_coeff(const MatrixXcd& C) {
  json re = json::array(), im = json::array();
  for (int i = 0; i < C.rows(); ++i) {
    json rrow = json::array(), irow = json::array();
    for (int j = 0; j < C.cols(); ++j) {
      rrow.push_back(C(i, j).real());
      irow.push_back(C(i, j).imag());
    }
    re.push_back(std::move(rrow));
    im.push_back(std::move(irow));
  }
  return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

}  // namespace

void TrigPolySpec::canonicalize_and_validate() {
  if (d < 1 || n < 1) throw std::invalid_argument("family spec: need d >= 1 and n >= 1");
  if (constant.size() == 0) constant = MatrixXcd::Zero(n, n);
  if (constant.rows() != n || constant.cols() != n)
    throw std::invalid_argument("family spec: constant term has wrong shape");

  const double tol = 1e-12;
  std::map<std::vector<int>, MatrixXcd> folded;
  MatrixXcd c0 = constant;
  for (const auto& t : terms) {
    if (t.m.size() != d) throw std::invalid_argument("family spec: harmonic length != d");
    if (t.coeff.rows() != n || t.coeff.cols() != n)
      throw std::invalid_argument("family spec: coefficient matrix has wrong shape");
    int sign = harmonic_sign(t.m);
    if (sign == 0) {
      // A zero harmonic is a constant contribution (C + C*)/2.
      c0 += 0.5 * (t.coeff + t.coeff.adjoint());
      continue;
    }
    VectorXi m = sign > 0 ? t.m : VectorXi(-t.m);
    // C e^{i m.x} + h.c. == (C*) e^{-i m.x} + h.c., so a mirrored term
    // folds in through its adjoint.
    MatrixXcd c = sign > 0 ? t.coeff : MatrixXcd(t.coeff.adjoint());
    std::vector<int> key(m.data(), m.data() + m.size());
    auto [it, fresh] = folded.try_emplace(key, c);
    if (!fresh) it->second += c;
  }

  c0 = 0.5 * (c0 + c0.adjoint().eval());
  if ((constant - constant.adjoint()).cwiseAbs().maxCoeff() > tol * (1 + constant.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("family spec: constant term is not self-adjoint");
  if (field == Field::Real) {
    if (!entrywise_real(c0, tol))
      throw std::invalid_argument("family spec: real family with complex constant term");
    for (const auto& [m, c] : folded) {
      // P cos - Q sin stays real symmetric iff both Cartesian parts do.
      MatrixXcd P = 0.5 * (c + c.adjoint());
      MatrixXcd Q = cd(0, -0.5) * (c - c.adjoint());
      if (!entrywise_real(P, tol) || !entrywise_real(Q, tol) ||
          !symmetric(P.real(), tol) || !symmetric(Q.real(), tol))
        throw std::invalid_argument(
            "family spec: term evaluates outside the real symmetric matrices");
    }
  }

  constant = c0;
  terms.clear();
  for (const auto& [key, c] : folded) {
    if (c.cwiseAbs().maxCoeff() <= 0.0) continue;
    TrigTerm t;
    t.m = Eigen::Map<const VectorXi>(key.data(), static_cast<int>(key.size()));
    t.coeff = c;
    terms.push_back(std::move(t));
  }
}

TrigPolySpec TrigPolySpec::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("family spec: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("family spec: top level must be an object");
  for (const auto& item : j.items()) {
    static const char* known[] = {"d", "n", "field", "domain", "terms", "constant"};
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw std::invalid_argument("family spec: unknown key \"" + item.key() + "\"");
  }
  for (const char* req : {"d", "n", "field", "domain", "terms"})
    if (!j.contains(req))
      throw std::invalid_argument(std::string("family spec: missing key \"") + req + "\"");

  TrigPolySpec spec;
  if (!j.at("d").is_number_integer() || !j.at("n").is_number_integer())
    throw std::invalid_argument("family spec: d and n must be integers");
  spec.d = j.at("d").get<int>();
  spec.n = j.at("n").get<int>();
  spec.field = field_from_string(j.at("field").get<std::string>());
  const std::string dom = j.at("domain").get<std::string>();
  if (dom == "torus") spec.domain = Domain::Torus;
  else if (dom == "chart") spec.domain = Domain::Chart;
  else throw std::invalid_argument("family spec: unknown domain: " + dom);
  if (spec.d < 1 || spec.n < 1)
    throw std::invalid_argument("family spec: need d >= 1 and n >= 1");

  if (j.contains("constant"))
    spec.constant = parse_coeff(j.at("constant"), spec.n, "constant");
  else
    spec.constant = MatrixXcd::Zero(spec.n, spec.n);

  if (!j.at("terms").is_array()) throw std::invalid_argument("family spec: terms must be an array");
  for (const auto& tj : j.at("terms")) {
    if (!tj.is_object() || !tj.contains("m"))
      throw std::invalid_argument("family spec: each term needs \"m\" and \"re\"");
    const auto& mj = tj.at("m");
    if (!mj.is_array() || static_cast<int>(mj.size()) != spec.d)
      throw std::invalid_argument("family spec: harmonic \"m\" must have d integer entries");
    TrigTerm t;
    t.m.resize(spec.d);
    for (int i = 0; i < spec.d; ++i) {
      if (!mj[static_cast<std::size_t>(i)].is_number_integer())
        throw std::invalid_argument("family spec: harmonic entries must be integers");
      t.m[i] = mj[static_cast<std::size_t>(i)].get<int>();
    }
    t.coeff = parse_coeff(tj, spec.n, "term");
    spec.terms.push_back(std::move(t));
  }
  spec.canonicalize_and_validate();
  return spec;
}

std::string TrigPolySpec::to_json_text() const {
  json j;
  j["d"] = d;
  j["n"] = n;
  j["field"] = to_string(field);
  j["domain"] = to_string(domain);
  j["constant"] = dump_coeff(constant);
  json ts = json::array();
  for (const auto& t : terms) {
    json tj = dump_coeff(t.coeff);
    tj["m"] = std::vector<int>(t.m.data(), t.m.data() + t.m.size());
    ts.push_back(std::move(tj));
  }
  j["terms"] = std::move(ts);
  return j.dump(2);
}

MatrixFamily from_spec(TrigPolySpec spec) {
  spec.canonicalize_and_validate();
  auto sp = std::make_shared<const TrigPolySpec>(std::move(spec));

  MatrixFamily fam;
  fam.name = "trig-spec";
  fam.d = sp->d;
  fam.n = sp->n;
  fam.field = sp->field;
  fam.domain = sp->domain;
  fam.spec = *sp;
  double scale = sp->constant.norm();
  for (const auto& t : sp->terms) scale += t.coeff.norm();
  fam.scale_hint = std::max(1.0, scale);

  fam.eval = [sp](const VectorXd& x) {
    MatrixXcd A = sp->constant;
    for (const auto& t : sp->terms) {
      double phase = 0;
      for (int j = 0; j < sp->d; ++j) phase += t.m[j] * x[j];
      MatrixXcd z = t.coeff * std::polar(1.0, phase);
      A += 0.5 * (z + z.adjoint().eval());
    }
    return A;
  };
  fam.deriv = [sp](const VectorXd& x, int j) {
    MatrixXcd A = MatrixXcd::Zero(sp->n, sp->n);
    for (const auto& t : sp->terms) {
      if (t.m[j] == 0) continue;
      double phase = 0;
      for (int i = 0; i < sp->d; ++i) phase += t.m[i] * x[i];
      MatrixXcd z = t.coeff * (cd(0, 1) * double(t.m[j]) * std::polar(1.0, phase));
      A += 0.5 * (z + z.adjoint().eval());
    }
    return A;
  };
  return fam;
}

namespace {

TrigTerm make_term(std::initializer_list<int> m, const MatrixXcd& coeff) {
  TrigTerm t;
  t.m.resize(static_cast<int>(m.size()));
  int i = 0;
  for (int v : m) t.m[i++] = v;
  t.coeff = coeff;
  return t;
}

MatrixFamily chart_family(std::string name, int d,
                          std::function<Eigen::Matrix2cd(const VectorXd&)> f,
                          std::function<Eigen::Matrix2cd(const VectorXd&, int)> df) {
  MatrixFamily fam;
  fam.name = std::move(name);
  fam.d = d;
  fam.n = 2;
  fam.field = Field::Real;
  fam.domain = Domain::Chart;
  fam.eval = [f](const VectorXd& x) { return MatrixXcd(f(x)); };
  fam.deriv = [df](const VectorXd& x, int j) { return MatrixXcd(df(x, j)); };
  return fam;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {
      "cone-symmetric", "cone-tilted", "borderline",   "sym2-identity",
      "real2band-t2",   "weyl-t3",     "nodal-ring-t3", "graphene-t2"};
  return names;
}

MatrixFamily builtin(const std::string& name) {
  const MatrixXcd I2 = MatrixXcd::Identity(2, 2);
  const cd im(0, 1);

  if (name == "cone-symmetric") {
    return chart_family(name, 2,
        [](const VectorXd& x) {
          Eigen::Matrix2cd A;
          A << x[0], x[1], x[1], -x[0];
          return A;
        },
        [](const VectorXd&, int j) {
          Eigen::Matrix2cd D;
          if (j == 0) D << 1, 0, 0, -1;
          else D << 0, 1, 1, 0;
          return D;
        });
  }
  if (name == "cone-tilted") {
    return chart_family(name, 2,
        [](const VectorXd& x) {
          Eigen::Matrix2cd A;
          A << x[0], x[1], x[1], 2 * x[0];
          return A;
        },
        [](const VectorXd&, int j) {
          Eigen::Matrix2cd D;
          if (j == 0) D << 1, 0, 0, 2;
          else D << 0, 1, 1, 0;
          return D;
        });
  }
  if (name == "borderline") {
    return chart_family(name, 2,
        [](const VectorXd& x) {
          Eigen::Matrix2cd A;
          A << x[0], x[1], x[1], x[0] * x[1] + x[0] * x[0];
          return A;
        },
        [](const VectorXd& x, int j) {
          Eigen::Matrix2cd D;
          if (j == 0) D << 1, 0, 0, x[1] + 2 * x[0];
          else D << 0, 1, 1, x[0];
          return D;
        });
  }
  if (name == "sym2-identity") {
    return chart_family(name, 3,
        [](const VectorXd& x) {
          Eigen::Matrix2cd A;
          A << x[0] + x[1], x[2], x[2], x[0] - x[1];
          return A;
        },
        [](const VectorXd&, int j) {
          Eigen::Matrix2cd D;
          if (j == 0) D << 1, 0, 0, 1;
          else if (j == 1) D << 1, 0, 0, -1;
          else D << 0, 1, 1, 0;
          return D;
        });
  }

  TrigPolySpec spec;
  spec.n = 2;
  if (name == "real2band-t2") {
    spec.d = 2;
    spec.field = Field::Real;
    spec.terms = {make_term({1, 0}, -im * pauli('z')), make_term({0, 1}, -im * pauli('x'))};
  } else if (name == "weyl-t3") {
    spec.d = 3;
    spec.field = Field::Complex;
    spec.terms = {make_term({1, 0, 0}, -im * pauli('x')),
                  make_term({0, 1, 0}, -im * pauli('y')),
                  make_term({0, 0, 1}, -im * pauli('z'))};
  } else if (name == "nodal-ring-t3") {
    spec.d = 3;
    spec.field = Field::Real;
    spec.terms = {make_term({1, 0, 0}, -im * pauli('z')),
                  make_term({0, 1, 0}, -im * pauli('x')),
                  make_term({0, 0, 1}, I2)};
  } else if (name == "graphene-t2") {
    spec.d = 2;
    spec.field = Field::Complex;
    spec.constant = pauli('x');
    MatrixXcd hop = MatrixXcd::Zero(2, 2);
    hop(0, 1) = 2.0;
    spec.terms = {make_term({1, 0}, hop), make_term({0, 1}, hop)};
  } else {
    throw std::invalid_argument("unknown builtin family: " + name);
  }
  MatrixFamily fam = from_spec(std::move(spec));
  fam.name = name;
  return fam;
}

MatrixFamily random_family(std::uint64_t seed, int d, int n, Field field,
                           int max_harmonic, double amplitude) {
  if (max_harmonic < 1) throw std::invalid_argument("random_family: max_harmonic >= 1");
  if (d < 1 || n < 1) throw std::invalid_argument("random_family: need d >= 1, n >= 1");
  std::mt19937_64 rng(seed);

  auto random_sym = [&]() {
    MatrixXd P(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) P(i, j) = P(j, i) = uniform_pm(rng, amplitude);
    return P;
  };
  auto random_full = [&]() {
    MatrixXcd C(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        C(i, j) = cd(uniform_pm(rng, amplitude), uniform_pm(rng, amplitude));
    return C;
  };
  auto random_herm = [&]() {
    MatrixXcd H(n, n);
    for (int i = 0; i < n; ++i) {
      H(i, i) = uniform_pm(rng, amplitude);
      for (int j = i + 1; j < n; ++j) {
        H(i, j) = cd(uniform_pm(rng, amplitude), uniform_pm(rng, amplitude));
        H(j, i) = std::conj(H(i, j));
      }
    }
    return H;
  };

  TrigPolySpec spec;
  spec.d = d;
  spec.n = n;
  spec.field = field;
  spec.domain = Domain::Torus;
  spec.constant = field == Field::Real ? MatrixXcd(random_sym().cast<cd>()) : random_herm();

  // Enumerate canonical one-sided harmonics in lexicographic order.
  VectorXi m = VectorXi::Constant(d, -max_harmonic);
  for (;;) {
    if (harmonic_sign(m) > 0) {
      TrigTerm t;
      t.m = m;
      if (field == Field::Real)
        t.coeff = random_sym().cast<cd>() + cd(0, 1) * random_sym().cast<cd>();
      else
        t.coeff = random_full();
      spec.terms.push_back(std::move(t));
    }
    int j = d - 1;
    while (j >= 0 && m[j] == max_harmonic) m[j--] = -max_harmonic;
    if (j < 0) break;
    ++m[j];
  }

  MatrixFamily fam = from_spec(std::move(spec));
  fam.name = "random-" + std::to_string(seed);
  return fam;
}

MatrixFamily load_family(const std::string& name_or_path) {
  for (const auto& n : builtin_names())
    if (n == name_or_path) return builtin(name_or_path);
  std::ifstream in(name_or_path);
  if (!in)
    throw std::invalid_argument("family \"" + name_or_path +
                                "\" is neither a builtin nor a readable file");
  std::ostringstream ss;
  ss << in.rdbuf();
  MatrixFamily fam = from_spec(TrigPolySpec::from_json_text(ss.str()));
  fam.name = name_or_path;
  return fam;
}

}  // namespace morseig
