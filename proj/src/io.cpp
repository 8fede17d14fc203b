#include "rime/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "rime/errors.hpp"

namespace rime {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

template <class T>
T parse_number(const std::string& tok, const char* what) {
  T value{};
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(std::string("bad ") + what + ": '" + tok + "'");
  }
  return value;
}

bool blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad boolean '" + v + "'");
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_graph(std::ostream& os, const DynGraph& g) {
  os << g.num_nodes() << ' ' << g.num_edges() << ' ' << g.edge_dim() << '\n';
  for (NodeId v : g.sorted_nodes()) {
    os << "node " << v;
    for (double f : g.features(v)) os << ' ' << format_double(f);
    os << '\n';
  }
  for (const Edge& e : g.edges()) os << "edge " << e.src << ' ' << e.dst << '\n';
}

DynGraph read_graph(std::istream& is) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    if (blank_or_comment(line)) continue;
    header = split_ws(line);
    break;
  }
  if (header.size() != 3) throw ParseError("graph header must be 'n m d'");
  const auto n = parse_number<std::size_t>(header[0], "node count");
  const auto m = parse_number<std::size_t>(header[1], "edge count");
  const auto d = parse_number<std::size_t>(header[2], "dimension");
  if (d == 0 || d % 2 != 0) throw ParseError("graph dimension must be positive and even");
  DynGraph g(d / 2);
  std::size_t nodes = 0, edges = 0;
  while (std::getline(is, line)) {
    if (blank_or_comment(line)) continue;
    const auto tok = split_ws(line);
    if (tok[0] == "node") {
      if (edges > 0) throw ParseError("node line after edge lines");
      if (tok.size() != 2 + d / 2) throw ParseError("node line has wrong feature count");
      FeatureVector f;
      for (std::size_t j = 2; j < tok.size(); ++j) f.push_back(parse_number<double>(tok[j], "feature"));
      g.add_node(parse_number<NodeId>(tok[1], "node id"), std::move(f));
      ++nodes;
    } else if (tok[0] == "edge") {
      if (tok.size() != 3) throw ParseError("edge line must be 'edge u v'");
      g.add_edge(parse_number<NodeId>(tok[1], "node id"), parse_number<NodeId>(tok[2], "node id"));
      ++edges;
    } else {
      throw ParseError("unknown graph line '" + tok[0] + "'");
    }
  }
  if (nodes != n || edges != m) throw ParseError("graph body does not match header counts");
  return g;
}

std::string format_update(const Update& u) {
  std::ostringstream os;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, InsertNode>) {
          os << "+n " << x.id;
          for (double f : x.features) os << ' ' << format_double(f);
        } else if constexpr (std::is_same_v<T, InsertEdge>) {
          os << "+e " << x.src << ' ' << x.dst;
        } else if constexpr (std::is_same_v<T, RemoveNode>) {
          os << "-n " << x.id;
        } else {
          os << "-e " << x.src << ' ' << x.dst;
        }
      },
      u);
  return os.str();
}

Update parse_update(const std::string& line, std::size_t feature_dim) {
  const auto tok = split_ws(line);
  if (tok.empty()) throw ParseError("empty update line");
  const std::string& op = tok[0];
  if (op == "+n") {
    if (tok.size() < 2) throw ParseError("'+n' needs an id");
    if (feature_dim != 0 && tok.size() != 2 + feature_dim) {
      throw ParseError("'+n' line has wrong feature count");
    }
    InsertNode x;
    x.id = parse_number<NodeId>(tok[1], "node id");
    for (std::size_t j = 2; j < tok.size(); ++j) x.features.push_back(parse_number<double>(tok[j], "feature"));
    return x;
  }
  if (op == "-n") {
    if (tok.size() != 2) throw ParseError("'-n' line must be '-n id'");
    return RemoveNode{parse_number<NodeId>(tok[1], "node id")};
  }
  if (op == "+e" || op == "-e") {
    if (tok.size() != 3) throw ParseError("edge update must have two endpoints");
    const auto a = parse_number<NodeId>(tok[1], "node id");
    const auto b = parse_number<NodeId>(tok[2], "node id");
    if (op == "+e") return InsertEdge{a, b};
    return RemoveEdge{a, b};
  }
  throw ParseError("unknown update op '" + op + "'");
}

void write_stream(std::ostream& os, const std::vector<Update>& updates) {
  for (const auto& u : updates) os << format_update(u) << '\n';
}

std::vector<Update> read_stream(std::istream& is, std::size_t feature_dim) {
  std::vector<Update> out;
  for (std::string line; std::getline(is, line);) {
    if (blank_or_comment(line)) continue;
    out.push_back(parse_update(line, feature_dim));
  }
  return out;
}

void set_config_field(RimeConfig& cfg, const std::string& key, const std::string& value) {
  auto num = [&] { return parse_number<double>(value, key.c_str()); };
  auto count = [&] { return parse_number<std::size_t>(value, key.c_str()); };
  try {
    if (key == "k") cfg.k = count();
    else if (key == "eps1") cfg.eps1 = num();
    else if (key == "eps2") cfg.eps2 = num();
    else if (key == "delta1") cfg.delta1 = num();
    else if (key == "delta2") cfg.delta2 = num();
    else if (key == "B") cfg.B = num();
    else if (key == "d") cfg.d = count();
    else if (key == "l") cfg.l = count();
    else if (key == "T") cfg.T = count();
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(value, "seed");
    else if (key == "model") cfg.model = parse_model_kind(value);
    else if (key == "mode") cfg.mode = parse_engine_mode(value);
    else if (key == "track_gamma") cfg.track_gamma = parse_bool(value);
    else if (key == "R_override") {
      if (value == "none" || value == "theory") cfg.R_override.reset();
      else cfg.R_override = num();
    } else if (key == "center") {
      cfg.center.clear();
      std::string v = value;
      for (char& c : v) if (c == ',') c = ' ';
      for (const auto& tok : split_ws(v)) cfg.center.push_back(parse_number<double>(tok, "center"));
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

void read_config(std::istream& is, RimeConfig& cfg) {
  for (std::string line; std::getline(is, line);) {
    if (blank_or_comment(line)) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line without '=': " + line);
    set_config_field(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::string format_config(const RimeConfig& cfg) {
  std::ostringstream os;
  os << "k = " << cfg.k << '\n'
     << "eps1 = " << format_double(cfg.eps1) << '\n'
     << "eps2 = " << format_double(cfg.eps2) << '\n'
     << "delta1 = " << format_double(cfg.delta1) << '\n'
     << "delta2 = " << format_double(cfg.delta2) << '\n'
     << "B = " << format_double(cfg.B) << '\n'
     << "d = " << cfg.d << '\n';
  if (!cfg.center.empty()) {
    os << "center =";
    for (double c : cfg.center) os << ' ' << format_double(c);
    os << '\n';
  }
  os << "model = " << to_string(cfg.model) << '\n'
     << "l = " << cfg.l << '\n'
     << "T = " << cfg.T << '\n'
     << "mode = " << to_string(cfg.mode) << '\n'
     << "R_override = " << (cfg.R_override ? format_double(*cfg.R_override) : "none") << '\n'
     << "seed = " << cfg.seed << '\n'
     << "track_gamma = " << (cfg.track_gamma ? "true" : "false") << '\n';
  return os.str();
}

DynGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file " + path);
  return read_graph(in);
}

void save_graph_file(const std::string& path, const DynGraph& g) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  write_graph(out, g);
}

std::vector<Update> load_stream_file(const std::string& path, std::size_t feature_dim) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open stream file " + path);
  return read_stream(in, feature_dim);
}

void save_stream_file(const std::string& path, const std::vector<Update>& updates) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  write_stream(out, updates);
}

}  // namespace rime
