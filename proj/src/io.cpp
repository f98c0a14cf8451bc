#include "hyperpack/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hyperpack {

namespace {

void append_u16_le(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void append_u32_le(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8)
    out.push_back(static_cast<char>((v >> shift) & 0xff));
}

std::uint16_t read_u16_le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (!in.good() && !in.eof()) throw IoError("read failed on " + path);
  return std::move(buffer).str();
}

constexpr std::size_t kHeaderBytes = 14;

}  // namespace

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.good()) throw IoError("write failed on " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " +
                        ec.message());
}

void save_embeddings(const std::string& path, const EmbeddingSet& set) {
  std::string blob;
  blob.reserve(kHeaderBytes +
               4 * static_cast<std::size_t>(set.count() * set.dim()));
  blob += "HYPF";
  append_u16_le(blob, kHypfVersion);
  append_u32_le(blob, static_cast<std::uint32_t>(set.count()));
  append_u32_le(blob, static_cast<std::uint32_t>(set.dim()));
  for (Index i = 0; i < set.count(); ++i) {
    for (Index j = 0; j < set.dim(); ++j) {
      const auto bits =
          std::bit_cast<std::uint32_t>(static_cast<float>(set.points()(i, j)));
      append_u32_le(blob, bits);
    }
  }
  atomic_write(path, blob);
}

LoadResult load_embeddings(const std::string& path) {
  const std::string blob = read_file(path);
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  if (blob.size() < 4 || std::memcmp(bytes, "HYPF", 4) != 0)
    throw BadMagic(path + " is not an embedding file (bad magic)");
  if (blob.size() < kHeaderBytes)
    throw TruncatedPayload(path + " ends inside the header");
  const std::uint16_t version = read_u16_le(bytes + 4);
  if (version != kHypfVersion)
    throw UnsupportedVersion(path + " has format version " +
                             std::to_string(version) + ", expected " +
                             std::to_string(kHypfVersion));
  const std::uint32_t count = read_u32_le(bytes + 6);
  const std::uint32_t dim = read_u32_le(bytes + 10);
  if (count < 1) throw IoError(path + " declares zero points");
  if (dim < 2) throw IoError(path + " declares dimension " +
                             std::to_string(dim) + ", need at least 2");
  const std::size_t expected =
      kHeaderBytes + 4ull * count * dim;
  if (blob.size() < expected)
    throw TruncatedPayload(path + " payload is " +
                           std::to_string(blob.size() - kHeaderBytes) +
                           " bytes, header promises " +
                           std::to_string(expected - kHeaderBytes));
  if (blob.size() > expected)
    throw IoError(path + " has " + std::to_string(blob.size() - expected) +
                  " trailing bytes");

  Mat points(static_cast<Index>(count), static_cast<Index>(dim));
  const unsigned char* p = bytes + kHeaderBytes;
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index j = 0; j < points.cols(); ++j, p += 4) {
      points(i, j) =
          static_cast<double>(std::bit_cast<float>(read_u32_le(p)));
    }
  }

  double max_dev = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    const double norm = points.row(i).norm();
    const double dev = std::abs(norm - 1.0);
    if (!(dev <= 1e-3))
      throw NormViolation(path + " row " + std::to_string(i) +
                          " has norm " + std::to_string(norm));
    max_dev = std::max(max_dev, dev);
    points.row(i) /= norm;
  }
  return LoadResult{EmbeddingSet(std::move(points)), max_dev};
}

void write_trace(const std::string& path,
                 const std::vector<TraceRecord>& trace) {
  std::string out;
  for (const TraceRecord& rec : trace) {
    nlohmann::json line = {
        {"iter", rec.iteration},   {"min_i", rec.min_i},
        {"min_j", rec.min_j},      {"min_dist", rec.min_distance},
        {"reg", rec.reg_value},    {"lr", rec.lr},
        {"ms", rec.wall_time_ms},
    };
    out += line.dump();
    out += '\n';
  }
  atomic_write(path, out);
}

std::vector<TraceRecord> read_trace(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<TraceRecord> trace;
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(line);
      TraceRecord rec;
      rec.iteration = parsed.at("iter").get<long>();
      rec.min_i = parsed.at("min_i").get<Index>();
      rec.min_j = parsed.at("min_j").get<Index>();
      rec.min_distance = parsed.at("min_dist").get<double>();
      rec.reg_value = parsed.at("reg").get<double>();
      rec.lr = parsed.at("lr").get<double>();
      rec.wall_time_ms = parsed.at("ms").get<double>();
      trace.push_back(rec);
    } catch (const nlohmann::json::exception& e) {
      throw MalformedTrace(path + ":" + std::to_string(line_no) + ": " +
                           e.what());
    }
  }
  if (trace.empty()) throw MalformedTrace(path + " holds no trace records");
  return trace;
}

void write_manifest(const std::string& path, const SampleManifest& manifest) {
  std::string out;
  for (const SampleEntry& entry : manifest.entries) {
    nlohmann::json emb = nlohmann::json::array();
    for (Index j = 0; j < entry.embedding.size(); ++j)
      emb.push_back(entry.embedding[j]);
    nlohmann::json line = {
        {"id", entry.identity},   {"sample", entry.sample},
        {"v_seed", entry.v_seed}, {"z_seed", entry.z_seed},
        {"emb", std::move(emb)},
    };
    out += line.dump();
    out += '\n';
  }
  atomic_write(path, out);
}

SampleManifest read_manifest(const std::string& path) {
  const std::string text = read_file(path);
  SampleManifest manifest;
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const nlohmann::json parsed = nlohmann::json::parse(line);
      SampleEntry entry;
      entry.identity = parsed.at("id").get<Index>();
      entry.sample = parsed.at("sample").get<Index>();
      entry.v_seed = parsed.at("v_seed").get<std::uint64_t>();
      entry.z_seed = parsed.at("z_seed").get<std::uint64_t>();
      const auto& emb = parsed.at("emb");
      entry.embedding.resize(static_cast<Index>(emb.size()));
      for (std::size_t j = 0; j < emb.size(); ++j)
        entry.embedding[static_cast<Index>(j)] = emb[j].get<double>();
      manifest.entries.push_back(std::move(entry));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  for (const SampleEntry& entry : manifest.entries) {
    manifest.n_id = std::max(manifest.n_id, entry.identity + 1);
    manifest.per_id = std::max(manifest.per_id, entry.sample + 1);
  }
  return manifest;
}

namespace {

// One mutable view per config key; parsing and serialization share it so
// the two can never drift apart.
struct KeyBinding {
  std::function<void(RunConfig&, const std::string&)> parse;
  std::function<std::string(const RunConfig&)> print;
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

long parse_long(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long out = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw InvalidArgument("config key " + key + ": bad integer '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const std::uint64_t out = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw InvalidArgument("config key " + key + ": bad integer '" + v + "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw InvalidArgument("config key " + key + ": bad number '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InvalidArgument("config key " + key + ": bad boolean '" + v + "'");
}

const std::map<std::string, KeyBinding>& key_bindings() {
  static const std::map<std::string, KeyBinding> bindings = [] {
    std::map<std::string, KeyBinding> b;
    const auto str = [&b](const std::string& key, std::string RunConfig::*f) {
      b[key] = {[f](RunConfig& c, const std::string& v) { c.*f = v; },
                [f](const RunConfig& c) { return c.*f; }};
    };
    const auto idx = [&b](const std::string& key, Index RunConfig::*f) {
      b[key] = {[key, f](RunConfig& c, const std::string& v) {
                  c.*f = static_cast<Index>(parse_long(key, v));
                },
                [f](const RunConfig& c) { return std::to_string(c.*f); }};
    };
    const auto lng = [&b](const std::string& key, long RunConfig::*f) {
      b[key] = {[key, f](RunConfig& c, const std::string& v) {
                  c.*f = parse_long(key, v);
                },
                [f](const RunConfig& c) { return std::to_string(c.*f); }};
    };
    const auto u64 = [&b](const std::string& key, std::uint64_t RunConfig::*f) {
      b[key] = {[key, f](RunConfig& c, const std::string& v) {
                  c.*f = parse_u64(key, v);
                },
                [f](const RunConfig& c) { return std::to_string(c.*f); }};
    };
    const auto dbl = [&b](const std::string& key, double RunConfig::*f) {
      b[key] = {[key, f](RunConfig& c, const std::string& v) {
                  c.*f = parse_double(key, v);
                },
                [f](const RunConfig& c) { return format_double(c.*f); }};
    };
    str("command", &RunConfig::command);
    idx("n_id", &RunConfig::n_id);
    idx("dim", &RunConfig::dim);
    lng("n_itr", &RunConfig::n_itr);
    dbl("alpha", &RunConfig::alpha);
    dbl("lr", &RunConfig::lr);
    dbl("lr_decay_factor", &RunConfig::lr_decay_factor);
    lng("lr_decay_interval", &RunConfig::lr_decay_interval);
    idx("batch_size", &RunConfig::batch_size);
    u64("seed", &RunConfig::seed);
    lng("reg_refresh_interval", &RunConfig::reg_refresh_interval);
    b["reg_in_cost"] = {
        [](RunConfig& c, const std::string& v) {
          c.reg_in_cost = parse_bool("reg_in_cost", v);
        },
        [](const RunConfig& c) {
          return std::string(c.reg_in_cost ? "true" : "false");
        }};
    str("init", &RunConfig::init);
    str("refs_in", &RunConfig::refs_in);
    str("gallery_file", &RunConfig::gallery_file);
    idx("gallery_synth_points", &RunConfig::gallery_synth_points);
    idx("gallery_synth_clusters", &RunConfig::gallery_synth_clusters);
    dbl("gallery_synth_concentration", &RunConfig::gallery_synth_concentration);
    u64("gallery_synth_seed", &RunConfig::gallery_synth_seed);
    dbl("beta", &RunConfig::beta);
    idx("per_id", &RunConfig::per_id);
    u64("sample_seed", &RunConfig::sample_seed);
    str("out", &RunConfig::out);
    str("trace", &RunConfig::trace);
    str("manifest_out", &RunConfig::manifest_out);
    str("emb_out", &RunConfig::emb_out);
    return b;
  }();
  return bindings;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig config;
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("config line " + std::to_string(line_no) +
                            " is not 'key = value': " + stripped);
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const auto it = key_bindings().find(key);
    if (it == key_bindings().end())
      throw InvalidArgument("unknown config key '" + key + "' on line " +
                            std::to_string(line_no));
    it->second.parse(config, value);
  }
  return config;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_file(path));
}

std::string serialize_run_config(const RunConfig& config) {
  std::string out;
  for (const auto& [key, binding] : key_bindings()) {
    const std::string value = binding.print(config);
    if (value.empty()) continue;  // unset paths and labels are omitted
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

PackingConfig to_packing_config(const RunConfig& config) {
  PackingConfig packing;
  packing.n_id = config.n_id;
  packing.dim = config.dim;
  packing.n_itr = config.n_itr;
  packing.alpha = config.alpha;
  packing.schedule.initial_lr = config.lr;
  packing.schedule.decay_factor = config.lr_decay_factor;
  packing.schedule.decay_interval = config.lr_decay_interval;
  packing.batch_size = config.batch_size;
  packing.seed = config.seed;
  packing.reg_refresh_interval = config.reg_refresh_interval;
  packing.reg_in_cost = config.reg_in_cost;
  return packing;
}

}  // namespace hyperpack
