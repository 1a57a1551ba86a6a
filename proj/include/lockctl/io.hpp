#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "lockctl/model.hpp"

namespace lockctl {

using json = nlohmann::json;

Lss lss_from_json(const json& doc);
Lss parse_lss(std::string_view text);
json to_json(const Lss& lss);
std::string serialize_lss(const Lss& lss);

json op_to_json(const Lss& lss, const Op& op);

// Strategy documents map process ids to lists of entries
//   {state, owned?, release_bit? | stack?/touched?, allow}
// optionally wrapped as {mode, locally_live, strategy}.
Strategy strategy_from_json(const Lss& lss, const json& doc);
json to_json(const Lss& lss, const Strategy& strategy);

Run trace_from_json(const Lss& lss, const json& doc);
json trace_to_json(const Lss& lss, const Run& run);

const char* annotation_name(Annotation mode);

}  // namespace lockctl
