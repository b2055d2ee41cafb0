#include "batchdl/io.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "batchdl/random.hpp"

namespace batchdl {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '\r') ++pos;
    if (pos > start) out.push_back(line.substr(start, pos - start));
  }
  return out;
}

double parse_real(std::string_view token, std::size_t line) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || end != token.data() + token.size()) {
    throw ParseError("cannot parse '" + std::string(token) + "' as a real number", line);
  }
  if (!std::isfinite(value)) throw ParseError("non-finite value '" + std::string(token) + "'", line);
  return value;
}

Index parse_count(std::string_view token, std::size_t line) {
  long long value = 0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || end != token.data() + token.size() || value < 0) {
    throw ParseError("cannot parse '" + std::string(token) + "' as a count", line);
  }
  return static_cast<Index>(value);
}

void append_real(std::string& out, double value) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  out.append(buf.data(), end);
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

DenseMatrix read_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header 'rows cols'", 1);
  const auto header = split(line);
  if (header.size() != 2) throw ParseError("header must be 'rows cols'", 1);
  const Index rows = parse_count(header[0], 1);
  const Index cols = parse_count(header[1], 1);
  if (rows < 1 || cols < 1) throw ParseError("matrix dimensions must be positive", 1);

  DenseMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto line_no = static_cast<std::size_t>(r) + 2;
    if (!std::getline(in, line)) {
      throw ParseError("file ended before matrix row " + std::to_string(r + 1) + " of " +
                           std::to_string(rows),
                       line_no);
    }
    const auto tokens = split(line);
    if (static_cast<Index>(tokens.size()) != cols) {
      throw ParseError("matrix row " + std::to_string(r + 1) + " has " + std::to_string(tokens.size()) +
                           " entries, expected " + std::to_string(cols),
                       line_no);
    }
    for (Index c = 0; c < cols; ++c) m(r, c) = parse_real(tokens[static_cast<std::size_t>(c)], line_no);
  }
  std::size_t line_no = static_cast<std::size_t>(rows) + 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!split(line).empty()) throw ParseError("unexpected data after the last matrix row", line_no);
  }
  return m;
}

void write_matrix(std::ostream& out, const DenseMatrix& m) {
  std::string text;
  text += std::to_string(m.rows()) + ' ' + std::to_string(m.cols()) + '\n';
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c > 0) text += ' ';
      append_real(text, m(r, c));
    }
    text += '\n';
  }
  out << text;
}

DenseMatrix load_matrix(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_matrix(in);
}

void save_matrix(const std::filesystem::path& path, const DenseMatrix& m) {
  auto out = open_out(path);
  write_matrix(out, m);
}

SparseCoeff read_sparse(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header 'n p nnz'", 1);
  const auto header = split(line);
  if (header.size() != 3) throw ParseError("header must be 'n p nnz'", 1);
  const Index n = parse_count(header[0], 1);
  const Index p = parse_count(header[1], 1);
  const Index nnz = parse_count(header[2], 1);
  if (n < 1 || p < 1) throw ParseError("dimensions must be positive", 1);
  if (nnz > n * p) throw ParseError("nnz exceeds n*p", 1);

  SparseCoeff x(n, p);
  for (Index t = 0; t < nnz; ++t) {
    const auto line_no = static_cast<std::size_t>(t) + 2;
    if (!std::getline(in, line)) throw ParseError("file ended before entry " + std::to_string(t + 1), line_no);
    const auto tokens = split(line);
    if (tokens.size() != 3) throw ParseError("entry must be 'row col value'", line_no);
    const Index row = parse_count(tokens[0], line_no);
    const Index col = parse_count(tokens[1], line_no);
    if (row < 1 || row > n || col < 1 || col > p) throw ParseError("index out of range", line_no);
    if (x.contains(row - 1, col - 1)) throw ParseError("duplicate entry", line_no);
    x.set(row - 1, col - 1, parse_real(tokens[2], line_no));
  }
  return x;
}

void write_sparse(std::ostream& out, const SparseCoeff& x) {
  std::string text;
  text += std::to_string(x.atoms()) + ' ' + std::to_string(x.samples()) + ' ' + std::to_string(x.nnz()) + '\n';
  for (const auto& t : x.triplets()) {
    text += std::to_string(t.row + 1) + ' ' + std::to_string(t.col + 1) + ' ';
    append_real(text, t.value);
    text += '\n';
  }
  out << text;
}

SparseCoeff load_sparse(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_sparse(in);
}

void save_sparse(const std::filesystem::path& path, const SparseCoeff& x) {
  auto out = open_out(path);
  write_sparse(out, x);
}

namespace {

// Header tokens of a PGM file, skipping '#' comments.
class PgmHeader {
 public:
  explicit PgmHeader(std::istream& in) : in_(in) {}

  std::string token() {
    std::string tok;
    int ch = 0;
    while ((ch = in_.get()) != EOF) {
      if (ch == '#') {
        while ((ch = in_.get()) != EOF && ch != '\n') {
        }
        ++line_;
        continue;
      }
      if (ch == '\n') ++line_;
      if (std::isspace(ch)) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(static_cast<char>(ch));
    }
    if (tok.empty()) throw ParseError("truncated PGM header", line_);
    return tok;
  }

  Index number() {
    const std::string tok = token();
    return parse_count(tok, line_);
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

}  // namespace

GrayImage read_pgm(std::istream& in) {
  PgmHeader header(in);
  const std::string magic = header.token();
  if (magic != "P2" && magic != "P5") throw ParseError("not a P2/P5 PGM file", 1);
  GrayImage image;
  image.width = header.number();
  image.height = header.number();
  const Index maxval = header.number();
  if (image.width < 1 || image.height < 1) throw ParseError("image dimensions must be positive", header.line());
  if (maxval < 1 || maxval > 255) throw ParseError("only 8-bit PGM (maxval <= 255) is supported", header.line());
  image.max_value = static_cast<int>(maxval);

  const auto count = static_cast<std::size_t>(image.width * image.height);
  image.pixels.resize(count);
  if (magic == "P5") {
    in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count) throw ParseError("truncated P5 pixel data", header.line());
  } else {
    for (std::size_t t = 0; t < count; ++t) {
      const Index v = header.number();
      if (v > maxval) throw ParseError("pixel value exceeds maxval", header.line());
      image.pixels[t] = static_cast<std::uint8_t>(v);
    }
  }
  for (const auto v : image.pixels) {
    if (v > maxval) throw ParseError("pixel value exceeds maxval", header.line());
  }
  return image;
}

GrayImage load_pgm(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  return read_pgm(in);
}

void save_pgm(const std::filesystem::path& path, const GrayImage& image) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out << "P5\n" << image.width << ' ' << image.height << '\n' << image.max_value << '\n';
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
}

DenseMatrix extract_patches(const GrayImage& image, const PatchSpec& spec) {
  if (spec.patch_size < 1 || spec.patch_count < 1) {
    throw InvalidArgument("extract_patches: patch size and count must be positive");
  }
  if (image.width < spec.patch_size || image.height < spec.patch_size) {
    throw InvalidArgument("extract_patches: image is smaller than the patch");
  }
  if (image.pixels.size() != static_cast<std::size_t>(image.width * image.height)) {
    throw InvalidArgument("extract_patches: pixel buffer does not match the image size");
  }
  const Index s = spec.patch_size;
  const Index across = image.width - s + 1;
  const Index down = image.height - s + 1;
  const auto maxval = static_cast<double>(image.max_value);
  Rng rng(spec.seed);

  DenseMatrix out(s * s, spec.patch_count);
  for (Index j = 0; j < spec.patch_count; ++j) {
    const auto corner = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(across * down)));
    const Index top = corner / across;
    const Index left = corner % across;
    for (Index c = 0; c < s; ++c) {
      for (Index r = 0; r < s; ++r) out(c * s + r, j) = image.at(top + r, left + c) / maxval;
    }
  }
  return out;
}

}  // namespace batchdl
