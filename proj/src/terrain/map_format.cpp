// Map document reader/writer. Grammar lives in docs/formats.md.

#include <algorithm>
#include <map>
#include <sstream>

#include "blockpath/error.hpp"
#include "blockpath/terrain.hpp"
#include "blockpath/text.hpp"

namespace blockpath {
namespace {

constexpr std::string_view kMagic = "blockmap";
constexpr int kFormatVersion = 1;

struct Line {
  int number;
  std::vector<std::string> tokens;
};

class LineReader {
 public:
  explicit LineReader(std::string_view document) {
    auto raw = text::split_lines(document);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      auto tokens = text::tokenize(raw[i]);
      if (!tokens.empty()) {
        lines_.push_back(Line{static_cast<int>(i + 1), std::move(tokens)});
      }
    }
  }

  bool done() const { return pos_ >= lines_.size(); }
  int last_line() const { return lines_.empty() ? 1 : lines_.back().number; }

  const Line& peek() const {
    if (done()) throw ParseError(last_line(), "unexpected end of document");
    return lines_[pos_];
  }
  const Line& next() {
    const auto& l = peek();
    ++pos_;
    return l;
  }

  // Reads `<key> <int>`.
  long long keyed_int(std::string_view key) {
    const auto& l = next();
    if (l.tokens.size() != 2 || l.tokens[0] != key) {
      throw ParseError(l.number, "expected '" + std::string(key) + " <n>'");
    }
    return text::parse_int(l.tokens[1], l.number);
  }

 private:
  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

bool uniform(const std::vector<BlockType>& col) {
  return std::all_of(col.begin(), col.end(),
                     [&](const BlockType& b) { return b == col.back(); });
}

}  // namespace

WorldModel load_map(std::string_view document, const BlockRegistry& registry) {
  LineReader in(document);

  {
    const auto& l = in.next();
    if (l.tokens.size() != 2 || l.tokens[0] != kMagic) {
      throw ParseError(l.number, "expected 'blockmap <version>' header");
    }
    if (text::parse_int(l.tokens[1], l.number) != kFormatVersion) {
      throw ParseError(l.number, "unsupported map version " + l.tokens[1]);
    }
  }
  const auto width = in.keyed_int("width");
  const auto depth = in.keyed_int("depth");
  if (width <= 0 || depth <= 0 || width > 4096 || depth > 4096) {
    throw ParseError(in.last_line(), "width/depth out of range");
  }

  const auto palette_size = in.keyed_int("palette");
  if (palette_size <= 0) throw ParseError(in.last_line(), "palette is empty");
  std::vector<BlockType> palette(static_cast<std::size_t>(palette_size));
  std::vector<bool> seen(palette.size(), false);
  for (long long i = 0; i < palette_size; ++i) {
    const auto& l = in.next();
    if (l.tokens.size() != 2) {
      throw ParseError(l.number, "palette entry must be '<index> <block id>'");
    }
    const auto idx = text::parse_int(l.tokens[0], l.number);
    if (idx < 0 || idx >= palette_size) {
      throw ParseError(l.number, "palette index out of range");
    }
    if (seen[static_cast<std::size_t>(idx)]) {
      throw ParseError(l.number, "duplicate palette index");
    }
    seen[static_cast<std::size_t>(idx)] = true;
    if (l.tokens[1] == kAir.id) {
      throw ParseError(l.number, "air cannot be a palette block");
    }
    palette[static_cast<std::size_t>(idx)] = registry.require(l.tokens[1]);
  }

  {
    const auto& l = in.next();
    if (l.tokens.size() != 1 || l.tokens[0] != "cells") {
      throw ParseError(l.number, "expected 'cells'");
    }
  }

  const int w = static_cast<int>(width);
  const int d = static_cast<int>(depth);
  WorldModel world(w, d, palette[0], 1, registry);
  std::vector<std::pair<BlockType, int>> surfaces(
      static_cast<std::size_t>(w) * static_cast<std::size_t>(d));

  for (int z = 0; z < d; ++z) {
    const auto& l = in.next();
    if (l.tokens.size() != static_cast<std::size_t>(w)) {
      throw ParseError(l.number, "row " + std::to_string(z) + " must have " +
                                     std::to_string(w) + " cells");
    }
    for (int x = 0; x < w; ++x) {
      const auto& tok = l.tokens[static_cast<std::size_t>(x)];
      const auto at = tok.find('@');
      if (at == std::string::npos) {
        throw ParseError(l.number, "cell '" + tok + "' must be index@height");
      }
      const auto idx = text::parse_int(std::string_view(tok).substr(0, at), l.number);
      const auto h = text::parse_int(std::string_view(tok).substr(at + 1), l.number);
      if (idx < 0 || idx >= palette_size) {
        throw ParseError(l.number, "cell palette index out of range");
      }
      if (h < 1 || h > WorldModel::kMaxHeight) {
        throw ParseError(l.number, "cell height out of range");
      }
      const auto& block = palette[static_cast<std::size_t>(idx)];
      surfaces[static_cast<std::size_t>(z * w + x)] = {block, static_cast<int>(h)};
      world.set_column(x, z, std::vector<BlockType>(static_cast<std::size_t>(h), block));
    }
  }

  if (!in.done() && in.peek().tokens[0] == "columns") {
    const auto count = in.keyed_int("columns");
    if (count < 0) throw ParseError(in.last_line(), "negative column count");
    std::vector<bool> explicit_cell(surfaces.size(), false);
    for (long long i = 0; i < count; ++i) {
      const auto& l = in.next();
      if (l.tokens.size() < 3) {
        throw ParseError(l.number, "column entry must be '<x> <z> <block>...'");
      }
      const auto x = text::parse_int(l.tokens[0], l.number);
      const auto z = text::parse_int(l.tokens[1], l.number);
      if (x < 0 || z < 0 || x >= w || z >= d) {
        throw ParseError(l.number, "column position out of bounds");
      }
      const auto cell = static_cast<std::size_t>(z * w + x);
      if (explicit_cell[cell]) throw ParseError(l.number, "duplicate column entry");
      explicit_cell[cell] = true;

      std::vector<BlockType> stack;
      for (std::size_t t = 2; t < l.tokens.size(); ++t) {
        stack.push_back(registry.require(l.tokens[t]));
      }
      if (stack.back() == kAir) {
        throw ParseError(l.number, "column must not end in air");
      }
      if (stack.size() > static_cast<std::size_t>(WorldModel::kMaxHeight)) {
        throw ParseError(l.number, "column exceeds max height");
      }
      const auto& [block, h] = surfaces[cell];
      if (stack.back() != block || static_cast<int>(stack.size()) != h) {
        throw ParseError(l.number, "column disagrees with its cell entry");
      }
      world.set_column(static_cast<int>(x), static_cast<int>(z), std::move(stack));
    }
  }

  {
    const auto& l = in.next();
    if (l.tokens.size() != 1 || l.tokens[0] != "end") {
      throw ParseError(l.number, "expected 'end'");
    }
  }
  if (!in.done()) throw ParseError(in.peek().number, "content after 'end'");

  return world;
}

std::string save_map(const WorldModel& world) {
  std::map<std::string, int> palette;
  for (int z = 0; z < world.depth(); ++z) {
    for (int x = 0; x < world.width(); ++x) {
      palette.emplace(world.surface_block(x, z).id, 0);
      for (const auto& b : world.column(x, z)) {
        if (b != kAir) palette.emplace(b.id, 0);
      }
    }
  }
  int next = 0;
  for (auto& [id, idx] : palette) idx = next++;

  std::ostringstream out;
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "width " << world.width() << '\n';
  out << "depth " << world.depth() << '\n';
  out << "palette " << palette.size() << '\n';
  for (const auto& [id, idx] : palette) out << idx << ' ' << id << '\n';
  out << "cells\n";
  std::vector<std::pair<int, int>> explicit_columns;
  for (int z = 0; z < world.depth(); ++z) {
    for (int x = 0; x < world.width(); ++x) {
      if (x > 0) out << ' ';
      out << palette.at(world.surface_block(x, z).id) << '@'
          << world.surface_height(x, z);
      if (!uniform(world.column(x, z))) explicit_columns.emplace_back(x, z);
    }
    out << '\n';
  }
  out << "columns " << explicit_columns.size() << '\n';
  for (const auto& [x, z] : explicit_columns) {
    out << x << ' ' << z;
    for (const auto& b : world.column(x, z)) out << ' ' << b.id;
    out << '\n';
  }
  out << "end\n";
  return out.str();
}

WorldModel load_map_file(const std::string& path, const BlockRegistry& registry) {
  return load_map(text::read_file(path), registry);
}

void save_map_file(const WorldModel& world, const std::string& path) {
  text::write_file(path, save_map(world));
}

}  // namespace blockpath
