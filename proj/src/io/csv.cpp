#include "sshc/io/csv.hpp"

#include "sshc/io/format.hpp"

namespace sshc::io {

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {
std::string cell_text(const Cell& cell) { return cell.value ? format_number(*cell.value) : cell.marker; }
}  // namespace

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += csv_escape(table.columns[c]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += csv_escape(cell_text(row[c]));
    }
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json to_json(const Table& table) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c].value) {
        obj[table.columns[c]] = *row[c].value;
      } else {
        obj[table.columns[c]] = row[c].marker;
      }
    }
    rows.push_back(std::move(obj));
  }
  return {{"columns", table.columns}, {"rows", rows}};
}

std::string trace_to_csv(const Trace<>& trace) {
  std::string out = "t_seconds,i_p_amperes,v_pt_volts\n";
  out.reserve(static_cast<std::size_t>(trace.size()) * 64);
  for (Eigen::Index n = 0; n < trace.size(); ++n) {
    out += format_number(trace.t[n]);
    out += ',';
    out += format_number(trace.i_p[n]);
    out += ',';
    out += format_number(trace.v_pt[n]);
    out += '\n';
  }
  return out;
}

}  // namespace sshc::io
