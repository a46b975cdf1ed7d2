#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hh/io.hpp"
#include "hh/rng.hpp"

namespace hh {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t b = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

std::optional<double> to_double(std::string_view tok) {
  double v = 0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long long> to_integer(std::string_view tok) {
  const auto v = to_double(tok);
  if (!v || *v != std::floor(*v) || std::abs(*v) > 9e15) return std::nullopt;
  return static_cast<long long>(*v);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Token stream over lines, for sections that span any number of lines.
class LineTokens {
 public:
  LineTokens(const std::vector<std::string_view>& lines, std::size_t& pos)
      : lines_(lines), pos_(pos) {}

  std::vector<std::string_view> take(std::size_t count, const char* section) {
    std::vector<std::string_view> out;
    out.reserve(count);
    while (out.size() < count) {
      if (pos_ >= lines_.size()) {
        throw Error(Errc::MalformedSection, std::string(section) + " ends early");
      }
      const auto line = trim(lines_[pos_]);
      if (line == "EOF" || (!line.empty() && std::isalpha(static_cast<unsigned char>(line[0])))) {
        throw Error(Errc::MalformedSection, std::string(section) + " ends early");
      }
      const auto toks = split_ws(line);
      if (out.size() + toks.size() > count) {
        throw Error(Errc::MalformedSection, std::string(section) + " has extra values");
      }
      out.insert(out.end(), toks.begin(), toks.end());
      ++pos_;
    }
    return out;
  }

 private:
  const std::vector<std::string_view>& lines_;
  std::size_t& pos_;
};

std::vector<double> numbers(const std::vector<std::string_view>& toks, const char* section) {
  std::vector<double> out;
  out.reserve(toks.size());
  for (auto t : toks) {
    const auto v = to_double(t);
    if (!v) throw Error(Errc::MalformedSection, std::string(section) + ": bad number '" + std::string(t) + "'");
    out.push_back(*v);
  }
  return out;
}

// Number of values and the (i, j) cell of each for an EXPLICIT format.
std::size_t explicit_count(const std::string& format, std::size_t n) {
  if (format == "FULL_MATRIX") return n * n;
  if (format == "UPPER_ROW" || format == "LOWER_ROW" || format == "UPPER_COL" ||
      format == "LOWER_COL") {
    return n * (n - 1) / 2;
  }
  if (format == "UPPER_DIAG_ROW" || format == "LOWER_DIAG_ROW" ||
      format == "UPPER_DIAG_COL" || format == "LOWER_DIAG_COL") {
    return n * (n + 1) / 2;
  }
  throw Error(Errc::UnsupportedEdgeWeightType, "EDGE_WEIGHT_FORMAT " + format);
}

std::vector<double> expand_matrix(const std::string& format, int n, const std::vector<double>& v) {
  std::vector<double> dist(static_cast<std::size_t>(n) * n, 0.0);
  auto put = [&](int i, int j, double w) {
    dist[static_cast<std::size_t>(i) * n + j] = w;
    dist[static_cast<std::size_t>(j) * n + i] = w;
  };
  std::size_t k = 0;
  if (format == "FULL_MATRIX") {
    dist = v;
    return dist;
  }
  // Column-major triangles enumerate cells like the opposite row-major ones.
  const bool upper_like = format == "UPPER_ROW" || format == "UPPER_DIAG_ROW" ||
                          format == "LOWER_COL" || format == "LOWER_DIAG_COL";
  const bool diag = format.find("DIAG") != std::string::npos;
  for (int i = 0; i < n; ++i) {
    if (upper_like) {
      for (int j = diag ? i : i + 1; j < n; ++j) put(i, j, v[k++]);
    } else {
      for (int j = 0; j <= (diag ? i : i - 1); ++j) put(i, j, v[k++]);
    }
  }
  return dist;
}

InstancePtr renamed(const InstancePtr& inst, const std::string& name) {
  if (inst->name == name) return inst;
  auto copy = std::make_shared<ProblemInstance>(*inst);
  copy->name = name;
  return copy;
}

}  // namespace

// ---------------------------------------------------------------------------
// TSPLIB

InstancePtr parse_tsplib(std::string_view text) {
  const auto lines = split_lines(text);
  std::string name = "tsplib";
  std::optional<int> dim;
  std::string weight_type;
  std::string weight_format;
  std::vector<Point> coords;
  std::vector<double> matrix;
  bool have_coords = false;
  bool have_matrix = false;

  std::size_t pos = 0;
  LineTokens tokens(lines, pos);
  auto need_dim = [&](const char* section) {
    if (!dim) throw Error(Errc::MalformedSection, std::string(section) + " before DIMENSION");
    return static_cast<std::size_t>(*dim);
  };

  while (pos < lines.size()) {
    const auto line = trim(lines[pos]);
    ++pos;
    if (line.empty()) continue;
    const std::string head = upper(split_ws(line)[0]);
    if (head == "EOF") break;
    if (head == "NODE_COORD_SECTION") {
      const std::size_t n = need_dim("NODE_COORD_SECTION");
      const auto vals = numbers(tokens.take(3 * n, "NODE_COORD_SECTION"), "NODE_COORD_SECTION");
      coords.assign(n, {});
      std::vector<char> seen(n, 0);
      for (std::size_t k = 0; k < n; ++k) {
        const double id = vals[3 * k];
        if (id != std::floor(id) || id < 1 || id > static_cast<double>(n) ||
            seen[static_cast<std::size_t>(id) - 1]) {
          throw Error(Errc::MalformedSection, "NODE_COORD_SECTION: bad node id");
        }
        seen[static_cast<std::size_t>(id) - 1] = 1;
        coords[static_cast<std::size_t>(id) - 1] = {vals[3 * k + 1], vals[3 * k + 2]};
      }
      have_coords = true;
      continue;
    }
    if (head == "EDGE_WEIGHT_SECTION") {
      const std::size_t n = need_dim("EDGE_WEIGHT_SECTION");
      if (weight_format.empty()) throw Error(Errc::MalformedSection, "EDGE_WEIGHT_FORMAT missing");
      matrix = numbers(tokens.take(explicit_count(weight_format, n), "EDGE_WEIGHT_SECTION"),
                       "EDGE_WEIGHT_SECTION");
      have_matrix = true;
      continue;
    }
    if (head == "DISPLAY_DATA_SECTION") {
      tokens.take(3 * need_dim("DISPLAY_DATA_SECTION"), "DISPLAY_DATA_SECTION");
      continue;
    }
    if (head.size() > 8 && head.ends_with("_SECTION")) {
      throw Error(Errc::MalformedSection, "unsupported section " + head);
    }
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw Error(Errc::MalformedSection, "unexpected line '" + std::string(line) + "'");
    }
    const std::string key = upper(trim(line.substr(0, colon)));
    const auto value = trim(line.substr(colon + 1));
    if (key == "NAME") {
      name = std::string(value);
    } else if (key == "TYPE") {
      const auto t = upper(value);
      if (t != "TSP") throw Error(Errc::MalformedSection, "TYPE " + t + " is not symmetric TSP");
    } else if (key == "DIMENSION") {
      const auto d = to_integer(value);
      if (!d || *d < 2) throw Error(Errc::MalformedSection, "bad DIMENSION");
      dim = static_cast<int>(*d);
    } else if (key == "EDGE_WEIGHT_TYPE") {
      weight_type = upper(value);
      if (weight_type != "EUC_2D" && weight_type != "CEIL_2D" && weight_type != "EXPLICIT") {
        throw Error(Errc::UnsupportedEdgeWeightType, "EDGE_WEIGHT_TYPE " + weight_type);
      }
    } else if (key == "EDGE_WEIGHT_FORMAT") {
      weight_format = upper(value);
    }
  }

  if (!dim) throw Error(Errc::MalformedSection, "DIMENSION missing");
  if (weight_type.empty()) throw Error(Errc::MalformedSection, "EDGE_WEIGHT_TYPE missing");
  if (weight_type == "EXPLICIT") {
    if (!have_matrix) throw Error(Errc::MalformedSection, "EDGE_WEIGHT_SECTION missing");
    return make_tsp_from_matrix(name, *dim, expand_matrix(weight_format, *dim, matrix));
  }
  if (!have_coords) throw Error(Errc::MalformedSection, "NODE_COORD_SECTION missing");
  return make_tsp_from_coords(name, std::move(coords),
                              weight_type == "EUC_2D" ? EdgeWeightType::Euc2d
                                                      : EdgeWeightType::Ceil2d);
}

std::string serialize_tsplib(const ProblemInstance& instance) {
  const auto& d = instance.tsp();
  std::ostringstream out;
  out << "NAME : " << instance.name << "\nTYPE : TSP\nDIMENSION : " << d.n << "\n";
  if (d.weight_type == EdgeWeightType::Euc2d || d.weight_type == EdgeWeightType::Ceil2d) {
    out << "EDGE_WEIGHT_TYPE : " << (d.weight_type == EdgeWeightType::Euc2d ? "EUC_2D" : "CEIL_2D")
        << "\nNODE_COORD_SECTION\n";
    for (int i = 0; i < d.n; ++i) {
      out << i + 1 << ' ' << fmt(d.coords[i].x) << ' ' << fmt(d.coords[i].y) << '\n';
    }
  } else {
    out << "EDGE_WEIGHT_TYPE : EXPLICIT\nEDGE_WEIGHT_FORMAT : FULL_MATRIX\nEDGE_WEIGHT_SECTION\n";
    for (int i = 0; i < d.n; ++i) {
      for (int j = 0; j < d.n; ++j) out << (j ? " " : "") << fmt(d.d(i, j));
      out << '\n';
    }
  }
  out << "EOF\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// OR-Library mknap

std::vector<InstancePtr> parse_orlib_mknap(std::string_view text, const std::string& name_prefix) {
  const auto toks = split_ws(text);
  std::size_t pos = 0;
  auto next = [&](const char* what) {
    if (pos >= toks.size()) throw Error(Errc::TruncatedFile, std::string("file ends inside ") + what);
    const auto v = to_double(toks[pos]);
    if (!v) throw Error(Errc::MalformedSection, "bad number '" + std::string(toks[pos]) + "'");
    ++pos;
    return *v;
  };
  auto count = [&](const char* what) {
    const double v = next(what);
    if (v != std::floor(v) || v < 0) throw Error(Errc::MalformedSection, std::string("bad ") + what);
    return static_cast<std::size_t>(v);
  };

  if (toks.empty()) throw Error(Errc::TruncatedFile, "empty file");
  const std::size_t problems = count("problem count");
  std::vector<InstancePtr> out;
  for (std::size_t p = 0; p < problems; ++p) {
    if (pos >= toks.size()) {
      throw Error(Errc::CountMismatch, "header declares " + std::to_string(problems) +
                                           " problems, file has " + std::to_string(p));
    }
    const std::size_t n = count("problem header");
    const std::size_t m = count("problem header");
    const double optimum = next("problem header");
    std::vector<double> profits(n);
    for (auto& v : profits) v = next("profits");
    std::vector<std::vector<double>> rows(m, std::vector<double>(n));
    for (auto& row : rows) {
      for (auto& v : row) v = next("weights");
    }
    std::vector<double> caps(m);
    for (auto& v : caps) v = next("capacities");
    auto inst = make_mkp(name_prefix + "-" + std::to_string(p + 1), std::move(profits),
                         std::move(rows), std::move(caps));
    if (optimum != 0) inst = with_best_known(inst, {optimum, ObjectiveSense::Maximize});
    out.push_back(std::move(inst));
  }
  if (pos != toks.size()) {
    throw Error(Errc::CountMismatch, "data after the declared " + std::to_string(problems) + " problems");
  }
  return out;
}

std::string serialize_orlib_mknap(const std::vector<InstancePtr>& instances) {
  std::ostringstream out;
  out << instances.size() << '\n';
  for (const auto& inst : instances) {
    const auto& d = inst->mkp();
    out << d.n << ' ' << d.m << ' ' << fmt(inst->best_known ? inst->best_known->value : 0) << '\n';
    for (int i = 0; i < d.n; ++i) out << (i ? " " : "") << fmt(d.profits[i]);
    out << '\n';
    for (int r = 0; r < d.m; ++r) {
      for (int i = 0; i < d.n; ++i) out << (i ? " " : "") << fmt(d.w(r, i));
      out << '\n';
    }
    for (int r = 0; r < d.m; ++r) out << (r ? " " : "") << fmt(d.capacities[r]);
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// MaxCut edge lists

InstancePtr parse_maxcut_edges(std::string_view text, const std::string& name) {
  std::vector<std::vector<std::string_view>> rows;
  for (auto line : split_lines(text)) {
    auto toks = split_ws(line);
    if (!toks.empty()) rows.push_back(std::move(toks));
  }
  if (rows.empty() || rows[0].size() != 2) {
    throw Error(Errc::MalformedSection, "first line must be 'n m'");
  }
  const auto n = to_integer(rows[0][0]);
  const auto m = to_integer(rows[0][1]);
  if (!n || !m || *n < 1 || *m < 0) throw Error(Errc::MalformedSection, "bad 'n m' header");
  if (static_cast<long long>(rows.size()) - 1 != *m) {
    throw Error(Errc::EdgeCountMismatch, "header declares " + std::to_string(*m) + " edges, file has " +
                                             std::to_string(rows.size() - 1));
  }
  std::vector<CutEdge> edges;
  edges.reserve(static_cast<std::size_t>(*m));
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& r = rows[k];
    if (r.size() != 3) throw Error(Errc::MalformedSection, "edge line needs 'u v w'");
    const auto u = to_integer(r[0]);
    const auto v = to_integer(r[1]);
    const auto w = to_double(r[2]);
    if (!u || !v || !w) throw Error(Errc::MalformedSection, "bad edge line");
    if (*u < 1 || *v < 1 || *u > *n || *v > *n) {
      throw Error(Errc::IndexOutOfRange, "edge " + std::to_string(*u) + " " + std::to_string(*v) +
                                             " outside 1.." + std::to_string(*n));
    }
    edges.push_back({static_cast<int>(*u - 1), static_cast<int>(*v - 1), *w});
  }
  return make_maxcut(name, static_cast<int>(*n), std::move(edges));
}

std::string serialize_maxcut_edges(const ProblemInstance& instance) {
  const auto& d = instance.maxcut();
  std::ostringstream out;
  out << d.n << ' ' << d.edges.size() << '\n';
  for (const auto& e : d.edges) out << e.u + 1 << ' ' << e.v + 1 << ' ' << fmt(e.w) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------

std::string serialize_instance(const ProblemInstance& instance) {
  switch (instance.kind) {
    case ProblemKind::Tsp: return serialize_tsplib(instance);
    case ProblemKind::Mkp: {
      auto copy = std::make_shared<ProblemInstance>(instance);
      return serialize_orlib_mknap({copy});
    }
    case ProblemKind::MaxCut: return serialize_maxcut_edges(instance);
  }
  return {};
}

InstancePtr parse_instance(std::string_view text, ProblemKind kind, const std::string& name) {
  switch (kind) {
    case ProblemKind::Tsp: return renamed(parse_tsplib(text), name);
    case ProblemKind::Mkp: {
      auto all = parse_orlib_mknap(text, name);
      if (all.size() != 1) throw Error(Errc::CountMismatch, "expected a single MKP problem");
      return renamed(all[0], name);
    }
    case ProblemKind::MaxCut: return parse_maxcut_edges(text, name);
  }
  throw Error(Errc::InvalidInstance, "unknown problem kind");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ConfigError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::ConfigError, "cannot write " + path);
  out << content;
  if (!out) throw Error(Errc::ConfigError, "write failed for " + path);
}

std::vector<InstancePtr> load_instances(const std::string& path, ProblemKind kind) {
  const std::string text = read_file(path);
  const std::string stem = std::filesystem::path(path).stem().string();
  switch (kind) {
    case ProblemKind::Tsp: return {parse_tsplib(text)};
    case ProblemKind::Mkp: return parse_orlib_mknap(text, stem);
    case ProblemKind::MaxCut: return {parse_maxcut_edges(text, stem)};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Generated instances

InstancePtr generate_instance(ProblemKind kind, int size, std::uint64_t seed) {
  if (size < 2) throw Error(Errc::ConfigError, "generated instances need size >= 2");
  char tag[24];
  std::snprintf(tag, sizeof tag, "%016llx", static_cast<unsigned long long>(seed));
  const std::string name =
      std::string("gen-") + to_string(kind) + "-" + std::to_string(size) + "-" + tag;
  Rng rng(derive_seed(seed, 0x9e4 + static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(size)));
  switch (kind) {
    case ProblemKind::Tsp: {
      std::vector<Point> pts(static_cast<std::size_t>(size));
      for (auto& p : pts) {
        p.x = rng.uniform01() * 1000;
        p.y = rng.uniform01() * 1000;
      }
      return make_tsp_from_coords(name, std::move(pts), EdgeWeightType::Euc2d);
    }
    case ProblemKind::Mkp: {
      constexpr int m = 5;
      std::vector<double> profits(static_cast<std::size_t>(size));
      for (auto& p : profits) p = static_cast<double>(rng.uniform_int(1, 100));
      std::vector<std::vector<double>> rows(m, std::vector<double>(static_cast<std::size_t>(size)));
      std::vector<double> caps(m);
      for (int r = 0; r < m; ++r) {
        double sum = 0;
        for (auto& w : rows[r]) {
          w = static_cast<double>(rng.uniform_int(1, 100));
          sum += w;
        }
        caps[r] = 0.5 * sum;
      }
      return make_mkp(name, std::move(profits), std::move(rows), std::move(caps));
    }
    case ProblemKind::MaxCut: {
      std::vector<CutEdge> edges;
      for (int u = 0; u < size; ++u) {
        for (int v = u + 1; v < size; ++v) {
          if (rng.bernoulli(0.5)) {
            edges.push_back({u, v, static_cast<double>(rng.uniform_int(-1, 10))});
          }
        }
      }
      return make_maxcut(name, size, std::move(edges));
    }
  }
  throw Error(Errc::ConfigError, "unknown problem kind");
}

bool same_instance(const ProblemInstance& a, const ProblemInstance& b) {
  if (a.name != b.name || a.kind != b.kind) return false;
  if (a.best_known.has_value() != b.best_known.has_value()) return false;
  if (a.best_known &&
      (a.best_known->value != b.best_known->value || a.best_known->sense != b.best_known->sense)) {
    return false;
  }
  switch (a.kind) {
    case ProblemKind::Tsp: {
      const auto& x = a.tsp();
      const auto& y = b.tsp();
      return x.n == y.n && x.weight_type == y.weight_type && x.coords == y.coords && x.dist == y.dist;
    }
    case ProblemKind::Mkp: {
      const auto& x = a.mkp();
      const auto& y = b.mkp();
      return x.n == y.n && x.m == y.m && x.profits == y.profits && x.weights == y.weights &&
             x.capacities == y.capacities;
    }
    case ProblemKind::MaxCut: return a.maxcut().n == b.maxcut().n && a.maxcut().edges == b.maxcut().edges;
  }
  return false;
}

}  // namespace hh
