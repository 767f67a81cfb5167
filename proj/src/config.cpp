#include "porewet/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace porewet {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* what) {
  throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) + "' as " + what);
}

template <class T>
T parse_number(std::string_view key, std::string_view v, const char* what) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, what);
  return out;
}

std::string unquote(std::string_view v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) ++i;
      out += v[i];
    }
    return out;
  }
  return std::string(v);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

std::string number_text(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Entry {
  std::string key;
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <class Acc>
Entry real(std::string key, Acc acc) {
  return {key, [key, acc](PipelineConfig& c, std::string_view v) { acc(c) = parse_number<double>(key, v, "a number"); },
          [acc](const PipelineConfig& c) { return number_text(acc(c)); }};
}

template <class Acc>
Entry integer(std::string key, Acc acc) {
  return {key,
          [key, acc](PipelineConfig& c, std::string_view v) {
            using T = std::remove_reference_t<decltype(acc(c))>;
            acc(c) = parse_number<T>(key, v, "an integer");
          },
          [acc](const PipelineConfig& c) { return std::to_string(acc(c)); }};
}

template <class Acc>
Entry boolean(std::string key, Acc acc) {
  return {key,
          [key, acc](PipelineConfig& c, std::string_view v) {
            if (v == "true") acc(c) = true;
            else if (v == "false") acc(c) = false;
            else bad_value(key, v, "true/false");
          },
          [acc](const PipelineConfig& c) { return std::string(acc(c) ? "true" : "false"); }};
}

template <class Acc>
Entry path(std::string key, Acc acc) {
  return {key, [acc](PipelineConfig& c, std::string_view v) { acc(c) = unquote(v); },
          [acc](const PipelineConfig& c) { return quote(acc(c).string()); }};
}

template <class Acc>
void add_taubin(std::vector<Entry>& e, const std::string& section, Acc acc) {
  e.push_back(real(section + ".lambda", [acc](auto& c) -> auto& { return acc(c).lambda; }));
  e.push_back(real(section + ".mu", [acc](auto& c) -> auto& { return acc(c).mu; }));
  e.push_back(integer(section + ".iterations", [acc](auto& c) -> auto& { return acc(c).iterations; }));
  e.push_back(boolean(section + ".pin_boundary", [acc](auto& c) -> auto& { return acc(c).pin_boundary; }));
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> e;
    e.push_back(path("io.input", [](auto& c) -> auto& { return c.input; }));
    e.push_back(path("io.output_dir", [](auto& c) -> auto& { return c.output_dir; }));
    e.push_back(path("io.measurements", [](auto& c) -> auto& { return c.measurements; }));
    e.push_back(path("io.summary", [](auto& c) -> auto& { return c.summary; }));
    e.push_back(boolean("io.write_meshes", [](auto& c) -> auto& { return c.write_meshes; }));
    e.push_back(integer("run.threads", [](auto& c) -> auto& { return c.threads; }));

    e.push_back(integer("measure.v_min", [](auto& c) -> auto& { return c.measure.v_min; }));
    e.push_back(integer("measure.min_path_nodes", [](auto& c) -> auto& { return c.measure.min_path_nodes; }));
    e.push_back(boolean("measure.smooth_meshes", [](auto& c) -> auto& { return c.measure.smooth_meshes; }));
    e.push_back(boolean("measure.smooth_paths", [](auto& c) -> auto& { return c.measure.smooth_paths; }));
    e.push_back(boolean("measure.clean_outliers", [](auto& c) -> auto& { return c.measure.clean_outliers; }));

    add_taubin(e, "taubin_ff", [](auto& c) -> auto& { return c.measure.taubin_ff; });
    add_taubin(e, "taubin_sf", [](auto& c) -> auto& { return c.measure.taubin_sf; });

    e.push_back(real("spline.jitter", [](auto& c) -> auto& { return c.measure.spline.jitter; }));
    e.push_back(real("spline.spacing", [](auto& c) -> auto& { return c.measure.spline.spacing; }));

    const auto ex = [](auto& c) -> auto& { return c.measure.extrapolation; };
    e.push_back(real("extrapolation.slab_half_width", [ex](auto& c) -> auto& { return ex(c).slab_half_width; }));
    e.push_back(real("extrapolation.max_face_distance", [ex](auto& c) -> auto& { return ex(c).max_face_distance; }));
    e.push_back(integer("extrapolation.min_faces", [ex](auto& c) -> auto& { return ex(c).min_faces; }));
    e.push_back(real("extrapolation.poly_window", [ex](auto& c) -> auto& { return ex(c).poly_window; }));
    e.push_back(integer("extrapolation.poly_degree", [ex](auto& c) -> auto& { return ex(c).poly_degree; }));
    e.push_back(real("extrapolation.fallback_threshold", [ex](auto& c) -> auto& { return ex(c).fallback_threshold; }));
    e.push_back(integer("extrapolation.near_faces", [ex](auto& c) -> auto& { return ex(c).near_faces; }));
    e.push_back(integer("extrapolation.lowess_robust_iterations",
                        [ex](auto& c) -> auto& { return ex(c).lowess_robust_iterations; }));
    e.push_back(real("extrapolation.contact_exclusion", [ex](auto& c) -> auto& { return ex(c).contact_exclusion; }));

    e.push_back(integer("outliers.window", [](auto& c) -> auto& { return c.measure.outliers.window; }));
    e.push_back(real("outliers.threshold", [](auto& c) -> auto& { return c.measure.outliers.threshold; }));
    e.push_back(integer("outliers.min_measurements", [](auto& c) -> auto& { return c.measure.outliers.min_measurements; }));

    e.push_back(real("map.uninvaded_angle", [](auto& c) -> auto& { return c.map.uninvaded_angle; }));
    e.push_back(integer("map.dilation_radius", [](auto& c) -> auto& { return c.map.dilation_radius; }));
    e.push_back(real("map.idw_power", [](auto& c) -> auto& { return c.map.idw_power; }));
    e.push_back(real("map.max_distance", [](auto& c) -> auto& { return c.map.max_distance; }));
    e.push_back({"map.connectivity",
                 [](PipelineConfig& c, std::string_view v) {
                   if (v == "6") c.map.connectivity = Connectivity::six;
                   else if (v == "26") c.map.connectivity = Connectivity::twentysix;
                   else bad_value("map.connectivity", v, "6 or 26");
                 },
                 [](const PipelineConfig& c) {
                   return std::string(c.map.connectivity == Connectivity::six ? "6" : "26");
                 }});
    return e;
  }();
  return entries;
}

} // namespace

void PipelineConfig::validate() const {
  measure.validate();
  map.validate();
  if (threads < 0) throw ConfigError("run.threads must be >= 0");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& e : registry()) out.push_back(e.key);
  return out;
}

void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& e : registry())
    if (e.key == key) {
      e.set(cfg, trim(value));
      return;
    }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void apply_override(PipelineConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  apply_setting(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    // Strip comments outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      else if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto where = " (line " + std::to_string(line_no) + ")";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header" + where);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key = value" + where);
    const std::string name(trim(line.substr(0, eq)));
    const std::string key = section.empty() ? name : section + "." + name;
    try {
      apply_setting(base, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(e.what() + where);
    }
  }
  return base;
}

PipelineConfig load_config(const std::filesystem::path& file, PipelineConfig base) {
  std::ifstream is(file);
  if (!is) throw IoError("cannot open config " + file.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string dump_config(const PipelineConfig& cfg) {
  std::string out, section;
  for (const auto& e : registry()) {
    const auto dot = e.key.find('.');
    const std::string sec = e.key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out += "\n";
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += e.key.substr(dot + 1) + " = " + e.get(cfg) + "\n";
  }
  return out;
}

} // namespace porewet
