#pragma once

// Text formats: graph file, update-stream file and `key = value` config.
// Numbers are written with %.17g so files round-trip exactly.

#include <iosfwd>
#include <string>
#include <vector>

#include "rime/engine.hpp"
#include "rime/netcore.hpp"

namespace rime {

// Header `n m d`, then `node <id> <f...>` lines, then `edge <u> <v>` lines.
void write_graph(std::ostream& os, const DynGraph& g);
DynGraph read_graph(std::istream& is);

std::string format_update(const Update& u);
// Throws ParseError on malformed lines; feature count is checked against
// feature_dim when it is nonzero.
Update parse_update(const std::string& line, std::size_t feature_dim = 0);

void write_stream(std::ostream& os, const std::vector<Update>& updates);
std::vector<Update> read_stream(std::istream& is, std::size_t feature_dim = 0);

// Applies `key = value` lines onto cfg. Blank lines and `#` comments are
// skipped; unknown keys raise ConfigError.
void read_config(std::istream& is, RimeConfig& cfg);
void set_config_field(RimeConfig& cfg, const std::string& key, const std::string& value);
std::string format_config(const RimeConfig& cfg);

std::string format_double(double x);

DynGraph load_graph_file(const std::string& path);
void save_graph_file(const std::string& path, const DynGraph& g);
std::vector<Update> load_stream_file(const std::string& path, std::size_t feature_dim = 0);
void save_stream_file(const std::string& path, const std::vector<Update>& updates);

}  // namespace rime
