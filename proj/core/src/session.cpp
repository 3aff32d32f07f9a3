#include "automix/session.hpp"

#include <array>
#include <set>
#include <utility>

namespace automix {

namespace {

constexpr std::array<std::pair<InstrumentClass, std::string_view>, 6> kClassNames{{
    {InstrumentClass::kDrums, "drums"},
    {InstrumentClass::kVox, "vox"},
    {InstrumentClass::kBass, "bass"},
    {InstrumentClass::kKeys, "keys"},
    {InstrumentClass::kGuitars, "guitars"},
    {InstrumentClass::kOther, "other"},
}};

}  // namespace

std::string_view to_string(InstrumentClass c) {
  for (const auto& [k, name] : kClassNames) {
    if (k == c) return name;
  }
  return "other";
}

InstrumentClass instrument_class_from_string(std::string_view name) {
  for (const auto& [k, n] : kClassNames) {
    if (n == name) return k;
  }
  throw std::invalid_argument("unknown instrument class '" + std::string(name) +
                              "'");
}

int Session::sample_rate() const {
  return tracks.empty() ? 44100 : tracks.front().clip.sample_rate();
}

const Track& Session::track(std::string_view id) const {
  for (const auto& t : tracks) {
    if (t.id == id) return t;
  }
  throw SessionError("no track with id '" + std::string(id) + "'");
}

void Session::validate() const {
  if (tracks.empty()) throw SessionError("session has no tracks");
  std::set<std::string, std::less<>> ids;
  for (const auto& t : tracks) {
    if (t.id.empty()) throw SessionError("track with empty id");
    if (!ids.insert(t.id).second) {
      throw SessionError("duplicate track id '" + t.id + "'");
    }
    if (t.is_vocal != (t.instrument_class == InstrumentClass::kVox)) {
      throw SessionError("track '" + t.id +
                         "': vocal flag must be set exactly for class vox");
    }
    if (t.clip.sample_rate() != tracks.front().clip.sample_rate()) {
      throw SessionError("track '" + t.id + "' has sample rate " +
                         std::to_string(t.clip.sample_rate()) + ", expected " +
                         std::to_string(tracks.front().clip.sample_rate()));
    }
  }

  if (subgroups.empty()) return;
  std::set<std::string, std::less<>> assigned;
  std::set<std::string, std::less<>> group_names;
  for (const auto& g : subgroups) {
    if (!group_names.insert(g.name).second) {
      throw SessionError("duplicate subgroup name '" + g.name + "'");
    }
    if (g.member_ids.empty()) {
      throw SessionError("subgroup '" + g.name + "' has no members");
    }
    for (const auto& id : g.member_ids) {
      if (!ids.contains(id)) {
        throw SessionError("subgroup '" + g.name + "' references unknown track '" +
                           id + "'");
      }
      if (!assigned.insert(id).second) {
        throw SessionError("track '" + id + "' appears in more than one subgroup");
      }
    }
  }
  for (const auto& id : ids) {
    if (!assigned.contains(id)) {
      throw SessionError("track '" + id + "' is not assigned to any subgroup");
    }
  }
}

}  // namespace automix
