#include "topicatlas/topic_model.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "topicatlas/error.hpp"

namespace topicatlas {

TopicModel::TopicModel(std::size_t k, std::size_t d, std::size_t n_w)
    : num_topics(k), num_docs(d), num_words(n_w), alpha(k, 1.0), p_topic(k, 0.0), theta(d * k, 0.0), beta(k * n_w, 0.0) {}

void TopicModel::derive_p_topic(const Corpus& corpus) {
  if (corpus.num_docs() != num_docs) throw DataError("model and corpus disagree on document count");
  std::fill(p_topic.begin(), p_topic.end(), 0.0);
  const double total = static_cast<double>(corpus.total_length());
  for (std::size_t d = 0; d < num_docs; ++d) {
    const double w = static_cast<double>(corpus.doc(d).length()) / total;
    auto row = theta_row(d);
    for (std::size_t t = 0; t < num_topics; ++t) p_topic[t] += w * row[t];
  }
}

bool TopicModel::valid(double tol) const {
  if (alpha.size() != num_topics || p_topic.size() != num_topics) return false;
  if (theta.size() != num_docs * num_topics || beta.size() != num_topics * num_words) return false;
  for (double a : alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) return false;
  }
  auto row_ok = [tol](std::span<const double> row) {
    double s = 0.0;
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) return false;
      s += v;
    }
    return std::abs(s - 1.0) <= tol;
  };
  for (std::size_t d = 0; d < num_docs; ++d) {
    if (!row_ok(theta_row(d))) return false;
  }
  for (std::size_t t = 0; t < num_topics; ++t) {
    if (!row_ok(beta_row(t))) return false;
  }
  return true;
}

namespace {

void put(std::ostream& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.write(buf, ptr - buf);
}

void put_row(std::ostream& out, std::span<const double> row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ' ';
    put(out, row[i]);
  }
  out << '\n';
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::istringstream next() {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError("unexpected end of model file", lineno_ + 1);
    ++lineno_;
    return std::istringstream(line);
  }
  std::size_t lineno() const { return lineno_; }

 private:
  std::istream& in_;
  std::size_t lineno_ = 0;
};

double read_double(std::istringstream& ss, const LineReader& r) {
  std::string tok;
  if (!(ss >> tok)) throw ParseError("missing value", r.lineno());
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) throw ParseError("bad number '" + tok + "'", r.lineno());
  return v;
}

void expect_end(std::istringstream& ss, const LineReader& r) {
  std::string extra;
  if (ss >> extra) throw ParseError("trailing token '" + extra + "'", r.lineno());
}

}  // namespace

void write_model(const TopicModel& m, std::ostream& out) {
  out << m.num_topics << ' ' << m.num_docs << ' ' << m.num_words << '\n';
  put_row(out, m.alpha);
  put_row(out, m.p_topic);
  for (std::size_t d = 0; d < m.num_docs; ++d) {
    auto row = m.theta_row(d);
    std::size_t nz = 0;
    for (double v : row) nz += v != 0.0;
    out << nz;
    for (std::size_t t = 0; t < m.num_topics; ++t) {
      if (row[t] == 0.0) continue;
      out << ' ' << t << ':';
      put(out, row[t]);
    }
    out << '\n';
  }
  for (std::size_t t = 0; t < m.num_topics; ++t) put_row(out, m.beta_row(t));
}

TopicModel read_model(std::istream& in) {
  LineReader r(in);
  auto header = r.next();
  std::size_t k = 0, d = 0, n_w = 0;
  if (!(header >> k >> d >> n_w)) throw ParseError("header must be 'K D N_w'", r.lineno());
  expect_end(header, r);
  if (k == 0) throw ParseError("model with zero topics", r.lineno());
  TopicModel m(k, d, n_w);
  {
    auto ss = r.next();
    for (auto& a : m.alpha) a = read_double(ss, r);
    expect_end(ss, r);
  }
  {
    auto ss = r.next();
    for (auto& p : m.p_topic) p = read_double(ss, r);
    expect_end(ss, r);
  }
  for (std::size_t doc = 0; doc < d; ++doc) {
    auto ss = r.next();
    std::size_t nz = 0;
    if (!(ss >> nz)) throw ParseError("theta row must start with entry count", r.lineno());
    auto row = m.theta_row(doc);
    for (std::size_t i = 0; i < nz; ++i) {
      std::string tok;
      if (!(ss >> tok)) throw ParseError("theta row shorter than its entry count", r.lineno());
      auto colon = tok.find(':');
      std::size_t t = 0;
      double v = 0.0;
      if (colon == std::string::npos) throw ParseError("theta entry without ':'", r.lineno());
      auto [p1, e1] = std::from_chars(tok.data(), tok.data() + colon, t);
      auto [p2, e2] = std::from_chars(tok.data() + colon + 1, tok.data() + tok.size(), v);
      if (e1 != std::errc() || p1 != tok.data() + colon || e2 != std::errc() || p2 != tok.data() + tok.size() ||
          t >= k) {
        throw ParseError("bad theta entry '" + tok + "'", r.lineno());
      }
      row[t] = v;
    }
    expect_end(ss, r);
  }
  for (std::size_t t = 0; t < k; ++t) {
    auto ss = r.next();
    for (auto& v : m.beta_row(t)) v = read_double(ss, r);
    expect_end(ss, r);
  }
  std::string extra;
  while (std::getline(in, extra)) {
    if (!extra.empty()) throw ParseError("unexpected content after beta rows", r.lineno() + 1);
  }
  return m;
}

void save_model(const TopicModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file " + path.string());
  write_model(model, out);
  if (!out) throw DataError("write failed for " + path.string());
}

TopicModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path.string());
  try {
    return read_model(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

void save_trace(const std::vector<double>& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write trace file " + path.string());
  out << "iter,value\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << (i + 1) << ',';
    put(out, trace[i]);
    out << '\n';
  }
}

}  // namespace topicatlas
