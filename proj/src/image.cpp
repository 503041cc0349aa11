#include "otg/image.hpp"

#include <fstream>

namespace otg {

namespace {

// Reads one whitespace-delimited token, skipping '#' comments, and keeps
// track of the byte offset for error messages.
std::string next_token(std::istream& in, const std::filesystem::path& path) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) {
        in.unget();
        break;
      }
      continue;
    }
    tok += static_cast<char>(c);
  }
  if (tok.empty()) throw IoError(path.string() + ": truncated header");
  return tok;
}

int parse_dim(const std::string& tok, const std::filesystem::path& path,
              const char* what) {
  try {
    const int v = std::stoi(tok);
    if (v < 1 || v > 1 << 15) throw std::out_of_range("");
    return v;
  } catch (const std::exception&) {
    throw IoError(path.string() + ": bad " + what + " '" + tok + "'");
  }
}

}  // namespace

Image load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  if (next_token(in, path) != "P6") {
    throw IoError(path.string() + ": not a P6 file");
  }
  const int width = parse_dim(next_token(in, path), path, "width");
  const int height = parse_dim(next_token(in, path), path, "height");
  const std::string maxval = next_token(in, path);
  if (maxval != "255") {
    throw IoError(path.string() + ": maxval " + maxval + " unsupported, need 255");
  }
  in.get();  // single whitespace byte after maxval

  Image img;
  img.width = width;
  img.height = height;
  const std::size_t need =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
  img.pixels.resize(need);
  const std::streamoff data_start = in.tellg();
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(need));
  const std::size_t got = static_cast<std::size_t>(in.gcount());
  if (got != need) {
    throw IoError(path.string() + ": pixel data ends at byte " +
                  std::to_string(data_start + static_cast<std::streamoff>(got)) +
                  ", got " + std::to_string(got) + " of " +
                  std::to_string(need) + " bytes");
  }
  return img;
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
  if (image.width < 1 || image.height < 1 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) *
                                 static_cast<std::size_t>(image.height) * 3) {
    throw ValueError("write_ppm: inconsistent image");
  }
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace otg
