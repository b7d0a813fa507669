#ifndef OPTEN_IO_HPP
#define OPTEN_IO_HPP

// File formats used by the CLI: CSV matrices/vectors (comma-separated,
// row-major, optional single '#' header line), P2/P5 PGM images scaled to
// [0,1], key = value config files, and run manifests.

#include "opten/core.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace opten {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline Mat read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && !line.empty() && line[0] == '#') { first = false; continue; }
    first = false;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::invalid_argument(path + ": bad number '" + cell + "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument(path + ": no data rows");
  const size_t cols = rows[0].size();
  Mat M(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols)
      throw std::invalid_argument(path + ": ragged rows");
    for (size_t j = 0; j < cols; ++j) M(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return M;
}

inline Vec read_vector_csv(const std::string& path) {
  Mat M = read_matrix_csv(path);
  if (M.cols() == 1) return M.col(0);
  if (M.rows() == 1) return M.row(0).transpose();
  throw std::invalid_argument(path + ": expected a single row or column");
}

inline void write_matrix_csv(const std::string& path, const Mat& M,
                             const std::string& header = "") {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (!header.empty()) out << "# " << header << "\n";
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) out << ",";
      out << format_double(M(i, j));
    }
    out << "\n";
  }
}

inline void write_vector_csv(const std::string& path, const Vec& v,
                             const std::string& header = "") {
  write_matrix_csv(path, v, header);
}

// ---------------------------------------------------------------------------
// PGM (P2 ascii / P5 binary), maxval 255. Pixels are scaled to [0,1] on load
// and back to 0..255 on save.

inline Mat read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P2" && magic != "P5")
    throw std::invalid_argument(path + ": not a P2/P5 PGM file");
  auto next_token = [&in, &path]() {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') { std::string rest; std::getline(in, rest); continue; }
      return tok;
    }
    throw std::invalid_argument(path + ": truncated header");
  };
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (w <= 0 || h <= 0 || maxval <= 0)
    throw std::invalid_argument(path + ": bad PGM header");
  Mat img(h, w);
  if (magic == "P5") {
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> buf(static_cast<size_t>(w) * h);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw std::invalid_argument(path + ": truncated P5 payload");
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j)
        img(i, j) = buf[static_cast<size_t>(i) * w + j] / double(maxval);
  } else {
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        int v;
        if (!(in >> v)) throw std::invalid_argument(path + ": truncated P2 payload");
        img(i, j) = v / double(maxval);
      }
  }
  return img;
}

inline void write_pgm(const std::string& path, const Mat& img, bool binary = true) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const int h = static_cast<int>(img.rows()), w = static_cast<int>(img.cols());
  out << (binary ? "P5" : "P2") << "\n" << w << " " << h << "\n255\n";
  auto quant = [](double v) {
    int q = static_cast<int>(std::lround(std::min(1.0, std::max(0.0, v)) * 255.0));
    return q;
  };
  if (binary) {
    std::vector<unsigned char> buf(static_cast<size_t>(w) * h);
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j)
        buf[static_cast<size_t>(i) * w + j] = static_cast<unsigned char>(quant(img(i, j)));
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  } else {
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) out << quant(img(i, j)) << (j + 1 < w ? " " : "");
      out << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Line-oriented "key = value" files ('#' starts a comment).

inline std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  auto trim = [](std::string s) {
    const char* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = val;
  }
  return kv;
}

/// Every CLI output gets a sibling "<output>.manifest" recording the resolved
/// parameters; re-running the same command and seed reproduces the output
/// (timestamps excluded from the contract).
inline void write_manifest(const std::string& out_path,
                           const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out(out_path + ".manifest");
  if (!out) throw std::runtime_error("cannot write " + out_path + ".manifest");
  for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
}

}  // namespace opten

#endif  // OPTEN_IO_HPP
