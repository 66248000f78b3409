#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sshc/sweep.hpp"
#include "sshc/waveform.hpp"

namespace sshc::io {

/// Quotes a field when it holds a comma, quote or line break.
std::string csv_escape(std::string_view field);

std::string to_csv(const Table& table);
nlohmann::ordered_json to_json(const Table& table);

/// Columns t_seconds, i_p_amperes, v_pt_volts.
std::string trace_to_csv(const Trace<>& trace);

}  // namespace sshc::io
