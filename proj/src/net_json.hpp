#pragma once

#include "dsde/net.hpp"
#include "json.hpp"

namespace dsde {

nlohmann::json net_to_json(const TwoLayerNet& net);
TwoLayerNet net_from_json(const nlohmann::json& j);

}  // namespace dsde
