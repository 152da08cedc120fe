#include "tactile/dataset_io.hpp"

#include <cstdio>
#include <sstream>

#include "tactile/digest.hpp"
#include "tactile/error.hpp"

namespace tactile {

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  std::filesystem::path p = stem;
  p += ext;
  return p;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    fail(ErrorKind::kInvalidArgument, "bad number '" + s + "' in dataset");
  }
  if (used != s.size()) fail(ErrorKind::kInvalidArgument, "bad number '" + s + "' in dataset");
  return v;
}

}  // namespace

std::filesystem::path dataset_stem(const std::filesystem::path& path) {
  if (path.extension() == ".csv" || path.extension() == ".json") {
    std::filesystem::path p = path;
    return p.replace_extension();
  }
  return path;
}

std::string dataset_csv(const Dataset& ds) {
  const std::size_t nf = ds.feature_count();
  std::string out = "t,x,y,d,event,step";
  for (std::size_t k = 1; k <= nf; ++k) out += ",f" + std::to_string(k);
  out += '\n';
  for (const SignalFrame& f : ds.frames) {
    require(f.features.size() == nf, "frame feature length does not match the pair index");
    out += std::to_string(f.tip_class);
    out += ',';
    append_number(out, f.x);
    out += ',';
    append_number(out, f.y);
    out += ',';
    append_number(out, f.d);
    out += ',' + std::to_string(f.event) + ',' + std::to_string(f.step);
    for (double v : f.features) {
      out += ',';
      append_number(out, v);
    }
    out += '\n';
  }
  return out;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& stem_in) {
  const std::filesystem::path stem = dataset_stem(stem_in);
  const std::string csv = dataset_csv(ds);
  Json manifest = {{"format", "tactile-dataset"},
                   {"version", ds.version},
                   {"config", to_json(ds.config)},
                   {"schedule", to_json(ds.schedule)},
                   {"seed", ds.schedule.seed},
                   {"config_digest", ds.config_digest},
                   {"csv_digest", sha256_hex(csv)},
                   {"frames", ds.frames.size()},
                   {"features", ds.feature_count()}};
  write_file_atomic(with_ext(stem, ".csv"), csv);
  write_file_atomic(with_ext(stem, ".json"), manifest.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& stem_in) {
  const std::filesystem::path stem = dataset_stem(stem_in);
  Json manifest;
  try {
    manifest = Json::parse(read_file(with_ext(stem, ".json")));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, "malformed dataset manifest: " + std::string(e.what()));
  }
  Dataset ds;
  try {
    ds.version = manifest.at("version").get<int>();
    if (ds.version != kDatasetVersion) {
      fail(ErrorKind::kVersionMismatch, "dataset format version " + std::to_string(ds.version) +
                                            " is not supported (expected " +
                                            std::to_string(kDatasetVersion) + ")");
    }
    ds.config = config_from_json(manifest.at("config"));
    ds.schedule = schedule_from_json(manifest.at("schedule"));
    ds.config_digest = manifest.at("config_digest").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, "malformed dataset manifest: " + std::string(e.what()));
  }
  if (config_digest(ds.config) != ds.config_digest) {
    fail(ErrorKind::kDigestMismatch, "dataset config digest does not match its embedded config");
  }
  const std::string csv = read_file(with_ext(stem, ".csv"));
  if (sha256_hex(csv) != manifest.value("csv_digest", std::string())) {
    fail(ErrorKind::kDigestMismatch, "dataset CSV digest mismatch");
  }
  const std::size_t nf = ds.feature_count();
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cols = split(line, ',');
    if (cols.size() != 6 + nf) fail(ErrorKind::kInvalidArgument, "dataset row has the wrong column count");
    SignalFrame f;
    f.tip_class = static_cast<int>(parse_double(cols[0]));
    f.x = parse_double(cols[1]);
    f.y = parse_double(cols[2]);
    f.d = parse_double(cols[3]);
    f.event = static_cast<int>(parse_double(cols[4]));
    f.step = static_cast<int>(parse_double(cols[5]));
    f.features.reserve(nf);
    for (std::size_t k = 0; k < nf; ++k) f.features.push_back(parse_double(cols[6 + k]));
    ds.frames.push_back(std::move(f));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& stem, const SensorConfig& expected) {
  Dataset ds = load_dataset(stem);
  if (ds.config_digest != config_digest(expected)) {
    fail(ErrorKind::kDigestMismatch, "dataset was generated from a different sensor config");
  }
  return ds;
}

}  // namespace tactile
