#include "tensalg/expression_file.hpp"

#include <charconv>
#include <fstream>

#include "tensalg/error.hpp"

namespace tensalg {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + what, line);
}

std::size_t parse_extent(const std::string& source, std::size_t line, const std::string& text) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || v == 0)
    fail(source, line, "bad extent '" + text + "'");
  return v;
}

}  // namespace

ExpressionFile parse_expression(std::istream& in, const std::string& source) {
  auto registry = std::make_shared<SpaceRegistry>();
  std::vector<std::pair<std::string, std::string>> factors;
  std::vector<std::size_t> factor_lines;
  std::string raw;
  std::size_t line_no = 0;
  auto define = [&](const std::string& name, const std::string& extent) {
    try {
      registry->define_space(name, parse_extent(source, line_no, extent));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      fail(source, line_no, e.what());
    }
  };
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.rfind("extents:", 0) == 0) {
      std::string rest = line.substr(8);
      for (char& c : rest)
        if (c == ',') c = ' ';
      std::size_t i = 0;
      while (i < rest.size()) {
        while (i < rest.size() && rest[i] == ' ') ++i;
        const std::size_t b = i;
        while (i < rest.size() && rest[i] != ' ') ++i;
        if (i == b) continue;
        const std::string item = rest.substr(b, i - b);
        const auto eq = item.find('=');
        if (eq == std::string::npos) fail(source, line_no, "expected <space>=<extent>, got '" + item + "'");
        define(item.substr(0, eq), item.substr(eq + 1));
      }
      continue;
    }
    if (line.rfind("extent ", 0) == 0 || line.rfind("extent\t", 0) == 0) {
      const std::string rest = trim(line.substr(6));
      const auto sp = rest.find_first_of(" \t");
      if (sp == std::string::npos) fail(source, line_no, "expected 'extent <space> <n>'");
      define(rest.substr(0, sp), trim(rest.substr(sp)));
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos) fail(source, line_no, "expected '<name> : <index-spec>'");
    const std::string name = trim(line.substr(0, colon));
    if (name.empty()) fail(source, line_no, "factor without a name");
    factors.emplace_back(name, line.substr(colon + 1));
    factor_lines.push_back(line_no);
  }
  if (factors.empty()) fail(source, line_no, "no factors");
  ExpressionFile out;
  out.registry = registry;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    try {
      out.factors.push_back(
          FactorSignature::of(*registry, parse_index_spec(*registry, factors[i].second), factors[i].first));
    } catch (const Error& e) {
      fail(source, factor_lines[i], e.what());
    }
  }
  registry->freeze();
  return out;
}

ExpressionFile load_expression(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open expression file '" + path.string() + "'");
  return parse_expression(in, path.string());
}

}  // namespace tensalg
