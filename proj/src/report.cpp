#include "gtsrep/harness.hpp"

#include <array>
#include <charconv>
#include <fstream>

namespace gtsrep {

using nlohmann::json;

json report_to_json(const Report& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"method", c.method},
                     {"m", c.m},
                     {"recon_mse", c.recon_mse},
                     {"pred_mse", c.pred_mse ? json(*c.pred_mse) : json(nullptr)},
                     {"ae_loss_history", c.ae_loss_history},
                     {"lstm_loss_history", c.lstm_loss_history}});
  }
  return {{"experiment", r.experiment},
          {"seed", r.seed},
          {"config_hash", r.config_hash},
          {"wall_time_seconds", r.wall_time_seconds},
          {"config", r.config},
          {"cells", cells}};
}

Report report_from_json(const json& j) {
  Report r;
  try {
    r.experiment = j.at("experiment").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.wall_time_seconds = j.at("wall_time_seconds").get<double>();
    r.config = j.at("config");
    for (const auto& c : j.at("cells")) {
      ReportCell cell;
      cell.method = c.at("method").get<std::string>();
      cell.m = c.at("m").get<Index>();
      cell.recon_mse = c.at("recon_mse").get<double>();
      if (!c.at("pred_mse").is_null()) cell.pred_mse = c.at("pred_mse").get<double>();
      cell.ae_loss_history = c.at("ae_loss_history").get<std::vector<double>>();
      cell.lstm_loss_history = c.at("lstm_loss_history").get<std::vector<double>>();
      r.cells.push_back(std::move(cell));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("report_from_json: ") + e.what());
  }
  return r;
}

namespace {

void append_number(std::string& out, double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), res.ptr);
}

}  // namespace

std::string report_csv(const Report& r) {
  std::string out = "method,m,recon_mse,pred_mse\n";
  for (const auto& c : r.cells) {
    out += c.method;
    out += ',';
    out += std::to_string(c.m);
    out += ',';
    append_number(out, c.recon_mse);
    out += ',';
    if (c.pred_mse) append_number(out, *c.pred_mse);
    out += '\n';
  }
  return out;
}

std::vector<std::filesystem::path> emit_report(const Report& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("emit_report: cannot create " + dir.string() + ": " + ec.message());

  auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("emit_report: cannot open " + path.string());
    os << text;
    if (!os) throw Error("emit_report: write failed for " + path.string());
  };
  const auto json_path = dir / "report.json";
  const auto csv_path = dir / (r.experiment + ".csv");
  write(json_path, report_to_json(r).dump(2) + "\n");
  write(csv_path, report_csv(r));
  return {json_path, csv_path};
}

}  // namespace gtsrep
