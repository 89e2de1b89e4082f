#include "tensalg/space_registry.hpp"

#include <cctype>

#include "tensalg/error.hpp"

namespace tensalg {

namespace {

bool valid_name(std::string_view name) {
  if (name.empty() || !std::isalpha(static_cast<unsigned char>(name.front()))) return false;
  for (char c : name)
    if (!std::isalnum(static_cast<unsigned char>(c))) return false;
  return true;
}

bool iequal(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

}  // namespace

SpaceRegistry::SpaceRegistry(std::initializer_list<std::pair<std::string, std::size_t>> spaces) {
  for (const auto& [name, extent] : spaces) define_space(name, extent);
}

SpaceRegistry& SpaceRegistry::operator=(const SpaceRegistry& other) {
  if (frozen()) throw Error("space registry is frozen: tensors already exist");
  spaces_ = other.spaces_;
  return *this;
}

SpaceRegistry& SpaceRegistry::define_space(std::string_view name, std::size_t extent) {
  if (frozen())
    throw Error("cannot define space '" + std::string(name) +
                "': registry is frozen because tensors already exist");
  if (!valid_name(name)) throw Error("invalid space name '" + std::string(name) + "'");
  if (extent == 0) throw Error("space '" + std::string(name) + "' must have extent >= 1");
  for (const auto& s : spaces_)
    if (iequal(s.name, name))
      throw Error("duplicate space '" + std::string(name) + "' (conflicts with '" + s.name + "')");
  spaces_.push_back(Space{std::string(name), extent});
  return *this;
}

std::size_t SpaceRegistry::canonical_rank(std::string_view name) const {
  for (std::size_t i = 0; i < spaces_.size(); ++i)
    if (spaces_[i].name == name) return i;
  throw Error("unknown space '" + std::string(name) + "'");
}

std::size_t SpaceRegistry::find_notation(std::string_view letters) const noexcept {
  for (std::size_t i = 0; i < spaces_.size(); ++i)
    if (iequal(spaces_[i].name, letters)) return i;
  return npos;
}

RegistryPtr make_registry(std::initializer_list<std::pair<std::string, std::size_t>> spaces) {
  return std::make_shared<const SpaceRegistry>(spaces);
}

}  // namespace tensalg
