#include "tensalg/index_notation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>

#include "tensalg/error.hpp"

namespace tensalg {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

IndexSpec parse_index_spec(const SpaceRegistry& registry, std::string_view text) {
  IndexSpec spec;
  std::size_t pos = 0;
  bool all_blank = std::all_of(text.begin(), text.end(), is_space);
  if (all_blank) return spec;

  std::size_t token_no = 0;
  while (true) {
    std::size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    std::size_t b = pos, e = end;
    while (b < e && is_space(text[b])) ++b;
    while (e > b && is_space(text[e - 1])) --e;
    std::string_view tok = text.substr(b, e - b);
    auto fail = [&](const std::string& why, std::size_t at) -> ParseError {
      return ParseError("index spec token " + std::to_string(token_no + 1) + " ('" +
                            std::string(tok) + "') at offset " + std::to_string(at) + ": " + why,
                        at);
    };
    if (tok.empty()) throw fail("empty token", b);

    std::size_t mark = tok.find_first_of("^_");
    if (mark == std::string_view::npos) throw fail("missing variance mark '^' or '_'", b);
    std::string_view letters = tok.substr(0, mark);
    if (letters.empty() || !std::isalpha(static_cast<unsigned char>(letters.front())))
      throw fail("missing space name", b);
    for (char c : letters)
      if (!std::isalnum(static_cast<unsigned char>(c))) throw fail("bad character in space name", b);

    std::size_t rank = registry.find_notation(letters);
    if (rank == SpaceRegistry::npos) throw fail("unknown space '" + std::string(letters) + "'", b);

    TensorIndex idx;
    idx.space = rank;
    idx.variance = tok[mark] == '^' ? Variance::contravariant : Variance::covariant;
    std::string_view label = tok.substr(mark + 1);
    if (!label.empty()) {
      std::uint32_t frame = 0;
      auto [p, ec] = std::from_chars(label.data(), label.data() + label.size(), frame);
      if (ec != std::errc() || p != label.data() + label.size())
        throw fail("frame label must be a decimal number", b + mark + 1);
      idx.frame = frame;
    }
    if (std::find(spec.begin(), spec.end(), idx) != spec.end()) throw fail("duplicate index", b);
    spec.push_back(idx);

    ++token_no;
    if (end == text.size()) break;
    pos = end + 1;
  }
  return spec;
}

std::string print_index_spec(const SpaceRegistry& registry, const IndexSpec& spec) {
  std::string out;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (i) out += ',';
    out += lower(registry.space(spec[i].space).name);
    out += spec[i].variance == Variance::contravariant ? '^' : '_';
    if (spec[i].frame != 0) out += std::to_string(spec[i].frame);
  }
  return out;
}

IndexSpec negate_spec(IndexSpec spec) {
  for (auto& idx : spec) idx.variance = flip(idx.variance);
  return spec;
}

IndexSpec canonical(IndexSpec spec) {
  std::sort(spec.begin(), spec.end());
  return spec;
}

void check_no_duplicates(const IndexSpec& spec) {
  IndexSpec sorted = canonical(spec);
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ShapeError("index list contains a duplicate index");
}

}  // namespace tensalg
