#pragma once

// Keyed output keeps insertion order so serialized documents are byte-stable.
#include <json.hpp>

namespace consilium {

using Json = nlohmann::ordered_json;

}  // namespace consilium
