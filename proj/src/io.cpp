#include "pcup/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "pcup/error.hpp"
#include "pcup/format.hpp"

namespace pcup {

namespace {

struct Line {
  std::size_t number = 0;
  std::vector<std::string_view> tokens;
};

// Splits into whitespace-separated tokens, keeping 1-based line numbers.
class LineReader {
public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(Line &line) {
    while (pos_ < text_.size() || (pos_ == text_.size() && !done_)) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) {
        end = text_.size();
        done_ = true;
      }
      std::string_view raw = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++number_;
      line.number = number_;
      line.tokens.clear();
      std::size_t i = 0;
      while (i < raw.size()) {
        while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i])))
          ++i;
        std::size_t j = i;
        while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j])))
          ++j;
        if (j > i)
          line.tokens.push_back(raw.substr(i, j - i));
        i = j;
      }
      return true;
    }
    return false;
  }

private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
  bool done_ = false;
};

[[noreturn]] void malformed(std::size_t line, const std::string &what) {
  throw Error(ErrorCode::Malformed, "line " + std::to_string(line) + ": " + what);
}

double to_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || !std::isfinite(v))
    malformed(line, "'" + std::string(tok) + "' is not a finite number");
  return v;
}

std::size_t to_count(std::string_view tok, std::size_t line) {
  std::size_t v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    malformed(line, "'" + std::string(tok) + "' is not a non-negative integer");
  return v;
}

bool is_comment(const Line &l) { return !l.tokens.empty() && l.tokens[0].front() == '#'; }

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

} // namespace

CloudFormat format_for_path(const std::filesystem::path &path) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".xyz")
    return CloudFormat::Xyz;
  if (ext == ".ply")
    return CloudFormat::Ply;
  throw Error(ErrorCode::UnsupportedFormat,
              "unsupported point cloud extension '" + ext + "' (" + path.string() + "); use .xyz or .ply");
}

std::string read_text_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad())
    throw Error(ErrorCode::Io, "failed reading " + path.string());
  return ss.str();
}

void write_text_file(const std::filesystem::path &path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out)
    throw Error(ErrorCode::Io, "failed writing " + path.string());
}

PointCloud parse_xyz(std::string_view text) {
  PointCloud cloud;
  LineReader reader(text);
  Line l;
  while (reader.next(l)) {
    if (l.tokens.empty() || is_comment(l))
      continue;
    if (l.tokens.size() != 3)
      malformed(l.number, "expected 3 coordinates, found " + std::to_string(l.tokens.size()));
    cloud.points.push_back(
        {to_double(l.tokens[0], l.number), to_double(l.tokens[1], l.number), to_double(l.tokens[2], l.number)});
  }
  return cloud;
}

PointCloud parse_ply(std::string_view text) {
  LineReader reader(text);
  Line l;
  if (!reader.next(l) || l.tokens.size() != 1 || l.tokens[0] != "ply")
    malformed(1, "missing 'ply' magic");
  if (!reader.next(l) || l.tokens.size() < 2 || l.tokens[0] != "format")
    malformed(l.number, "missing format line");
  if (l.tokens[1] != "ascii")
    throw Error(ErrorCode::UnsupportedFormat, "only ASCII PLY is supported, got '" + std::string(l.tokens[1]) + "'");

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;
    bool has_list = false;
  };
  std::vector<Element> elements;
  bool ended = false;
  while (reader.next(l)) {
    if (l.tokens.empty())
      continue;
    const auto key = l.tokens[0];
    if (key == "comment" || key == "obj_info")
      continue;
    if (key == "end_header") {
      ended = true;
      break;
    }
    if (key == "element") {
      if (l.tokens.size() != 3)
        malformed(l.number, "element needs a name and a count");
      elements.push_back({std::string(l.tokens[1]), to_count(l.tokens[2], l.number), {}, false});
    } else if (key == "property") {
      if (elements.empty())
        malformed(l.number, "property before any element");
      if (l.tokens.size() >= 2 && l.tokens[1] == "list") {
        elements.back().has_list = true;
        elements.back().properties.push_back(l.tokens.size() >= 5 ? std::string(l.tokens[4]) : "");
      } else if (l.tokens.size() == 3) {
        elements.back().properties.emplace_back(l.tokens[2]);
      } else {
        malformed(l.number, "bad property line");
      }
    } else {
      malformed(l.number, "unexpected header keyword '" + std::string(key) + "'");
    }
  }
  if (!ended)
    malformed(l.number, "missing end_header");

  PointCloud cloud;
  bool found = false;
  for (const auto &el : elements) {
    if (el.name != "vertex") {
      // Rows of other elements are skipped line by line.
      for (std::size_t i = 0; i < el.count; ++i)
        if (!reader.next(l))
          malformed(l.number, "unexpected end of file in element '" + el.name + "'");
      continue;
    }
    found = true;
    if (el.has_list)
      malformed(l.number, "list properties on vertex are not supported");
    auto col = [&](const char *name) -> std::size_t {
      const auto it = std::find(el.properties.begin(), el.properties.end(), name);
      if (it == el.properties.end())
        throw Error(ErrorCode::Malformed, std::string("vertex element has no '") + name + "' property");
      return static_cast<std::size_t>(it - el.properties.begin());
    };
    const std::size_t cx = col("x"), cy = col("y"), cz = col("z");
    cloud.points.reserve(el.count);
    for (std::size_t i = 0; i < el.count; ++i) {
      if (!reader.next(l))
        malformed(l.number, "expected " + std::to_string(el.count) + " vertices, found " + std::to_string(i));
      if (l.tokens.size() != el.properties.size())
        malformed(l.number, "expected " + std::to_string(el.properties.size()) + " values, found " +
                                std::to_string(l.tokens.size()));
      cloud.points.push_back(
          {to_double(l.tokens[cx], l.number), to_double(l.tokens[cy], l.number), to_double(l.tokens[cz], l.number)});
    }
    break;
  }
  if (!found)
    throw Error(ErrorCode::Malformed, "PLY file has no vertex element");
  return cloud;
}

PointCloud read_cloud(const std::filesystem::path &path) {
  const CloudFormat f = format_for_path(path);
  const std::string text = read_text_file(path);
  try {
    return f == CloudFormat::Xyz ? parse_xyz(text) : parse_ply(text);
  } catch (const Error &e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::string format_xyz(const PointCloud &cloud) {
  std::string out;
  out.reserve(cloud.size() * 48);
  for (const auto &p : cloud) {
    out += significant(p.x, 9);
    out += ' ';
    out += significant(p.y, 9);
    out += ' ';
    out += significant(p.z, 9);
    out += '\n';
  }
  return out;
}

std::string format_ply(const PointCloud &cloud) {
  std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(cloud.size()) +
                    "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  return out + format_xyz(cloud);
}

void write_cloud(const PointCloud &cloud, const std::filesystem::path &path, CloudFormat format) {
  write_text_file(path, format == CloudFormat::Xyz ? format_xyz(cloud) : format_ply(cloud));
}

void write_cloud(const PointCloud &cloud, const std::filesystem::path &path) {
  write_cloud(cloud, path, format_for_path(path));
}

TriangleMesh parse_off(std::string_view text) {
  LineReader reader(text);
  Line l;
  auto next_content = [&]() {
    while (reader.next(l))
      if (!l.tokens.empty() && !is_comment(l))
        return true;
    return false;
  };
  if (!next_content())
    malformed(l.number, "empty OFF file");
  std::vector<std::string_view> counts = l.tokens;
  if (counts[0] == "OFF") {
    counts.erase(counts.begin());
  } else if (counts[0].substr(0, 3) == "OFF") {
    counts[0] = counts[0].substr(3);
  } else {
    malformed(l.number, "missing OFF magic");
  }
  if (counts.empty()) {
    if (!next_content())
      malformed(l.number, "missing counts line");
    counts = l.tokens;
  }
  if (counts.size() < 2)
    malformed(l.number, "counts line needs vertex and face counts");
  const std::size_t nv = to_count(counts[0], l.number);
  const std::size_t nf = to_count(counts[1], l.number);

  TriangleMesh mesh;
  mesh.vertices.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!next_content())
      malformed(l.number, "expected " + std::to_string(nv) + " vertices");
    if (l.tokens.size() < 3)
      malformed(l.number, "vertex needs 3 coordinates");
    mesh.vertices.push_back(
        {to_double(l.tokens[0], l.number), to_double(l.tokens[1], l.number), to_double(l.tokens[2], l.number)});
  }
  for (std::size_t f = 0; f < nf; ++f) {
    if (!next_content())
      malformed(l.number, "expected " + std::to_string(nf) + " faces");
    const std::size_t k = to_count(l.tokens[0], l.number);
    if (k < 3 || l.tokens.size() < k + 1)
      malformed(l.number, "face needs at least 3 vertex indices");
    std::vector<std::size_t> idx(k);
    for (std::size_t j = 0; j < k; ++j) {
      idx[j] = to_count(l.tokens[j + 1], l.number);
      if (idx[j] >= nv)
        malformed(l.number, "vertex index " + std::to_string(idx[j]) + " out of range");
    }
    for (std::size_t j = 1; j + 1 < k; ++j)
      mesh.triangles.push_back({idx[0], idx[j], idx[j + 1]});
  }
  return mesh;
}

TriangleMesh read_off(const std::filesystem::path &path) {
  const std::string ext = lower(path.extension().string());
  if (ext != ".off")
    throw Error(ErrorCode::UnsupportedFormat, "mesh files must be ASCII .off, got '" + path.string() + "'");
  const std::string text = read_text_file(path);
  try {
    return parse_off(text);
  } catch (const Error &e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::string format_curvature_csv(const CurvatureField &field) {
  std::string out = "index,c\n";
  for (std::size_t i = 0; i < field.values.size(); ++i)
    out += std::to_string(i) + "," + significant(field.values[i], 9) + "\n";
  return out;
}

} // namespace pcup
