#pragma once

#include <filesystem>
#include <string>

#include "evac/network.hpp"

namespace evac {

/// Parses an instance from JSON text. Throws ParseError naming the bad
/// field; does not validate model invariants (run validate() for those).
EvacuationNetwork instance_from_json(const std::string& text);

/// Canonical JSON serialization; save followed by load is structurally
/// identical and byte-stable (save(load(s)) == s for canonical s).
std::string instance_to_json(const EvacuationNetwork& net);

EvacuationNetwork load_instance(const std::filesystem::path& path);
void save_instance(const EvacuationNetwork& net, const std::filesystem::path& path);

}  // namespace evac
