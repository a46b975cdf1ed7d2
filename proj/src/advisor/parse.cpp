#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "hh/advisor.hpp"
#include "hh/envs.hpp"

namespace hh {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n`*");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n`*");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

// Lines inside the first ```tag fence; nullopt when absent or unterminated.
std::optional<std::vector<std::string>> fenced_block(const std::string& raw,
                                                     const std::string& tag) {
  const auto lines = lines_of(raw);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string t = trim(lines[i]);
    if (lines[i].find("```") == std::string::npos || t != tag) continue;
    std::vector<std::string> body;
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      if (lines[j].find("```") != std::string::npos) return body;
      body.push_back(lines[j]);
    }
    return std::nullopt;
  }
  return std::nullopt;
}

std::optional<std::pair<std::string, std::string>> split_kv(const std::string& line,
                                                            char sep) {
  const auto pos = line.find(sep);
  if (pos == std::string::npos) return std::nullopt;
  std::string key = trim(line.substr(0, pos));
  std::string value = trim(line.substr(pos + 1));
  if (key.empty()) return std::nullopt;
  return std::make_pair(key, value);
}

std::optional<double> parse_number(const std::string& text) {
  if (text == "true") return 1.0;
  if (text == "false") return 0.0;
  double v = 0;
  const char* b = text.data();
  const char* e = b + text.size();
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) return std::nullopt;
  return v;
}

// Genomes a reply token refers to: an exact id, else every genome of a family.
std::vector<std::size_t> resolve(const std::string& token,
                                 const std::vector<HeuristicGenome>& pool) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].id == token) return {i};
  }
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].info().name == token) out.push_back(i);
  }
  return out;
}

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

ParsedFilter parse_filter_reply(const std::string& raw,
                                const std::vector<HeuristicGenome>& pool) {
  std::vector<char> chosen(pool.size(), 0);
  std::string token;
  auto flush = [&] {
    const std::string t = trim(token);
    token.clear();
    if (t.empty()) return;
    for (std::size_t i : resolve(t, pool)) chosen[i] = 1;
  };
  for (char c : raw) {
    if (c == ',' || c == '\n' || c == ';') flush();
    else token += c;
  }
  flush();
  ParsedFilter out;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (chosen[i]) out.names.push_back(pool[i].id);
  }
  out.parse_ok = !out.names.empty();
  return out;
}

ParsedEdit parse_edit_reply(const std::string& raw, Family family,
                            const std::string& strategy_id) {
  ParsedEdit out;
  const auto block = fenced_block(raw, "edit");
  if (!block) {
    out.error = "no ```edit block";
    return out;
  }
  StrategyEdit edit;
  edit.strategy_id = strategy_id;
  edit.target = family;
  for (const auto& line : lines_of(raw)) {
    if (auto kv = split_kv(line, ':'); kv && kv->first == "rationale") {
      edit.rationale = kv->second;
      break;
    }
  }
  for (const auto& line : *block) {
    if (trim(line).empty()) continue;
    const auto kv = split_kv(line, '=');
    if (!kv) {
      out.error = "malformed edit line: " + trim(line);
      return out;
    }
    if (kv->first == "family") {
      if (kv->second != family_info(family).name) {
        out.error = "edit targets family " + kv->second;
        return out;
      }
      continue;
    }
    if (!is_edit_target(family, kv->first)) {
      out.error = "undeclared edit target " + kv->first;
      return out;
    }
    const auto value = parse_number(kv->second);
    if (!value) {
      out.error = "non-numeric value for " + kv->first;
      return out;
    }
    edit.edits.push_back({kv->first, *value});
  }
  out.edit = std::move(edit);
  out.parse_ok = true;
  return out;
}

ParsedSelect parse_select_reply(const std::string& raw,
                                const std::vector<HeuristicGenome>& pool) {
  ParsedSelect out;
  for (const auto& line : lines_of(raw)) {
    if (auto kv = split_kv(line, ':'); kv && kv->first == "heuristic") {
      out.heuristic = kv->second;
      out.has_name = !kv->second.empty();
      break;
    }
  }
  if (const auto block = fenced_block(raw, "features")) {
    for (const auto& line : *block) {
      const auto kv = split_kv(line, '=');
      if (!kv) continue;
      if (const auto v = parse_number(kv->second)) out.predicted.emplace_back(kv->first, *v);
    }
    out.has_features = !out.predicted.empty();
  }
  if (out.has_name) {
    const auto hits = resolve(out.heuristic, pool);
    if (!hits.empty()) out.heuristic = pool[hits.front()].id;
    out.parse_ok = !hits.empty() && out.has_features;
  }
  return out;
}

std::string format_edit_reply(const StrategyEdit& edit) {
  std::string out = "rationale: " + (edit.rationale.empty() ? std::string("-") : edit.rationale) +
                    "\n```edit\nfamily = " + family_info(edit.target).name + "\n";
  for (const auto& e : edit.edits) {
    const bool is_flag = std::none_of(
        family_info(edit.target).params.begin(), family_info(edit.target).params.end(),
        [&](const ParamSpec& p) { return p.name == e.target; });
    out += e.target + " = ";
    out += is_flag ? (e.value != 0 ? "true" : "false") : shortest(e.value);
    out += "\n";
  }
  out += "```\n";
  return out;
}

std::string format_select_reply(const std::string& heuristic,
                                const FeatureMap& predicted) {
  std::string out = "heuristic: " + heuristic + "\n```features\n";
  for (const auto& [name, value] : predicted) out += name + " = " + format_sig4(value) + "\n";
  out += "```\n";
  return out;
}

}  // namespace hh
