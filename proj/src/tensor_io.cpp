#include "tensalg/tensor_io.hpp"

#include <unistd.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tensalg/error.hpp"

namespace tensalg {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& what) {
  throw ParseError(std::string(source) + ":" + std::to_string(line) + ": " + what, line);
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

bool parse_double(std::string_view s, double& v) {
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && p == end;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DenseTensor parse_tensor(std::istream& in, std::string_view source, const RegistryPtr& expected) {
  std::string raw;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& out) {
    while (std::getline(in, raw)) {
      ++line_no;
      out = trim(raw);
      if (!out.empty() && out.front() != '#') return true;
    }
    return false;
  };

  std::string_view line;
  if (!next_line(line) || line != "tensorfile 1")
    fail(source, line_no, "expected header 'tensorfile 1'");

  auto declared = std::make_shared<SpaceRegistry>();
  RegistryPtr registry;
  IndexSpec spec;
  for (;;) {
    if (!next_line(line)) fail(source, line_no, "missing 'indices' line");
    const auto w = words(line);
    if (w[0] == "space") {
      std::size_t extent = 0;
      if (w.size() != 3) fail(source, line_no, "expected 'space <name> <extent>'");
      auto [p, ec] = std::from_chars(w[2].data(), w[2].data() + w[2].size(), extent);
      if (ec != std::errc() || p != w[2].data() + w[2].size())
        fail(source, line_no, "bad extent '" + std::string(w[2]) + "'");
      try {
        declared->define_space(w[1], extent);
      } catch (const Error& e) {
        fail(source, line_no, e.what());
      }
      continue;
    }
    if (w[0] != "indices") fail(source, line_no, "unexpected '" + std::string(w[0]) + "'");
    if (expected) {
      if (!(*declared == *expected)) fail(source, line_no, "declared spaces do not match the expected registry");
      registry = expected;
    } else {
      registry = declared;
    }
    try {
      spec = parse_index_spec(*registry, trim(line.substr(std::string_view("indices").size())));
      check_no_duplicates(spec);
    } catch (const Error& e) {
      fail(source, line_no, e.what());
    }
    break;
  }
  if (!next_line(line) || line != "data") fail(source, line_no, "expected 'data'");

  const std::size_t n = extent_product(*registry, spec);
  std::vector<double> values;
  values.reserve(n);
  while (std::getline(in, raw)) {
    ++line_no;
    for (auto tok : words(raw)) {
      double v = 0.0;
      if (!parse_double(tok, v)) fail(source, line_no, "bad number '" + std::string(tok) + "'");
      values.push_back(v);
    }
  }
  if (values.size() != n)
    fail(source, line_no, "expected " + std::to_string(n) + " components, found " + std::to_string(values.size()));
  return DenseTensor::from_canonical(registry, canonical(spec), std::move(values));
}

DenseTensor read_tensor(const std::filesystem::path& path, const RegistryPtr& expected) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open tensor file '" + path.string() + "'");
  return parse_tensor(in, path.string(), expected);
}

std::string format_tensor(const DenseTensor& t) {
  std::ostringstream os;
  os << "tensorfile 1\n";
  for (const auto& s : t.registry()->spaces()) os << "space " << s.name << ' ' << s.extent << '\n';
  os << "indices " << t.spec_string() << "\ndata\n";
  const auto ext = t.extents();
  const std::size_t row = ext.empty() ? 1 : ext.back();
  const auto d = t.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    os << format_double(d[i]);
    os << ((i + 1) % row == 0 ? '\n' : ' ');
  }
  return os.str();
}

void write_tensor(const std::filesystem::path& path, const DenseTensor& t) {
  write_file_atomically(path, format_tensor(t));
}

void write_file_atomically(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw Error("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
  }
}

}  // namespace tensalg
