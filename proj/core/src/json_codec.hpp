// SPDX-License-Identifier: Apache-2.0
// JSON conversions shared by the server, client and tournament sources.
// Kept out of the public headers so consumers are free to use any JSON library.
#pragma once

#include "birdbench/level.hpp"
#include "birdbench/percept.hpp"

#include "json.hpp"

namespace birdbench::proto::codec {

using nlohmann::json;

json to_value(const Percept &p);
Percept percept_from_value(const json &j);

json to_value(const level::AttemptScore &s);
level::AttemptScore score_from_value(const json &j);

json to_value(const ScreenMap &m);
ScreenMap screen_map_from_value(const json &j);

} // namespace birdbench::proto::codec
