#include <algorithm>
#include <cctype>
#include <filesystem>

#include "blockpath/content.hpp"
#include "blockpath/error.hpp"
#include "blockpath/text.hpp"

namespace fs = std::filesystem;

namespace blockpath {

double Book::pass_threshold() const {
  if (threshold) return *threshold;
  return quiz.size() <= 3 ? 1.0 : 0.75;
}

void Book::validate() const {
  if (id.empty()) throw ConfigError("book has no id");
  if (pages.empty()) throw ConfigError("book '" + id + "' has no pages");
  if (threshold && (*threshold < 0 || *threshold > 1)) {
    throw ConfigError("book '" + id + "' threshold must lie in [0, 1]");
  }
  for (std::size_t i = 0; i < quiz.size(); ++i) {
    const auto& q = quiz[i];
    const auto where = "book '" + id + "' question " + std::to_string(i + 1);
    if (q.options.size() < 2 || q.options.size() > 6) {
      throw ConfigError(where + " needs 2 to 6 options");
    }
    if (q.correct >= q.options.size()) throw ConfigError(where + " has no valid correct option");
    for (const auto& o : q.options) {
      if (o.empty()) throw ConfigError(where + " has an empty option");
    }
  }
}

QuizResult grade_quiz(const Book& book, const std::vector<std::size_t>& answers) {
  if (answers.size() != book.quiz.size()) {
    throw ArgumentError("expected " + std::to_string(book.quiz.size()) + " answers, got " +
                        std::to_string(answers.size()));
  }
  QuizResult r;
  std::size_t right = 0;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (answers[i] >= book.quiz[i].options.size()) {
      throw ArgumentError("answer " + std::to_string(i + 1) + " is not an option index");
    }
    const bool ok = answers[i] == book.quiz[i].correct;
    r.correct.push_back(ok);
    right += ok;
  }
  r.score = answers.empty() ? 1.0 : static_cast<double>(right) / static_cast<double>(answers.size());
  r.gate_passed = r.score >= book.pass_threshold();
  return r;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// "key: value" split; nullopt if there is no colon.
std::optional<std::pair<std::string, std::string>> key_value(std::string_view line) {
  const auto c = line.find(':');
  if (c == std::string_view::npos) return std::nullopt;
  return std::pair{trim(line.substr(0, c)), trim(line.substr(c + 1))};
}

}  // namespace

Book parse_book(std::string_view doc) {
  const auto lines = text::split_lines(doc);
  Book book;
  std::size_t i = 0;
  auto ln = [&] { return static_cast<int>(i + 1); };
  while (i < lines.size() && trim(lines[i]).empty()) ++i;
  if (i >= lines.size() || trim(lines[i]) != "---") throw ParseError(ln(), "book must start with '---'");
  for (++i;; ++i) {
    if (i >= lines.size()) throw ParseError(ln(), "unterminated front matter");
    const auto line = trim(lines[i]);
    if (line == "---") break;
    if (line.empty()) continue;
    auto kv = key_value(line);
    if (!kv) throw ParseError(ln(), "front matter lines are 'key: value'");
    if (kv->first == "id") book.id = kv->second;
    else if (kv->first == "title") book.title = kv->second;
    else if (kv->first == "threshold") book.threshold = text::parse_double(kv->second, ln());
    else throw ParseError(ln(), "unknown front matter key '" + kv->first + "'");
  }
  ++i;

  enum { None, Page, Quiz } section = None;
  std::string page;
  auto flush_page = [&] {
    if (section != Page) return;
    while (!page.empty() && page.back() == '\n') page.pop_back();
    book.pages.push_back(page);
    page.clear();
  };
  for (; i < lines.size(); ++i) {
    const auto& raw = lines[i];
    const auto line = trim(raw);
    if (line == "=== page" || line == "=== quiz") {
      flush_page();
      if (section == Quiz) throw ParseError(ln(), "the quiz must be the last section");
      section = line == "=== page" ? Page : Quiz;
      continue;
    }
    if (section == None) {
      if (line.empty()) continue;
      throw ParseError(ln(), "expected '=== page' or '=== quiz'");
    }
    if (section == Page) {
      if (!page.empty() || !line.empty()) page += raw + "\n";
      continue;
    }
    if (line.empty()) continue;
    auto kv = key_value(line);
    if (!kv) throw ParseError(ln(), "quiz lines are 'question:', 'option:', 'option*:' or 'explanation:'");
    const auto& [key, value] = *kv;
    if (key == "question") {
      book.quiz.push_back(QuizItem{value, {}, 0, {}});
      book.quiz.back().correct = static_cast<std::size_t>(-1);
      continue;
    }
    if (book.quiz.empty()) throw ParseError(ln(), "'" + key + "' before any question");
    auto& q = book.quiz.back();
    if (key == "option" || key == "option*") {
      if (key == "option*") {
        if (q.correct != static_cast<std::size_t>(-1)) {
          throw ParseError(ln(), "question has more than one correct option");
        }
        q.correct = q.options.size();
      }
      q.options.push_back(value);
    } else if (key == "explanation") {
      q.explanation = value;
    } else {
      throw ParseError(ln(), "unknown quiz key '" + key + "'");
    }
  }
  flush_page();
  try {
    book.validate();
  } catch (const ConfigError& e) {
    throw ParseError(static_cast<int>(lines.size()), e.what());
  }
  return book;
}

std::string save_book(const Book& book) {
  std::string out = "---\nid: " + book.id + "\ntitle: " + book.title + "\n";
  if (book.threshold) out += "threshold: " + text::format_double(*book.threshold) + "\n";
  out += "---\n";
  for (const auto& p : book.pages) out += "=== page\n" + p + "\n";
  if (!book.quiz.empty()) {
    out += "=== quiz\n";
    for (const auto& q : book.quiz) {
      out += "question: " + q.question + "\n";
      for (std::size_t o = 0; o < q.options.size(); ++o) {
        out += (o == q.correct ? "option*: " : "option: ") + q.options[o] + "\n";
      }
      if (!q.explanation.empty()) out += "explanation: " + q.explanation + "\n";
    }
  }
  return out;
}

BookLibrary BookLibrary::load_dir(const std::string& dir) {
  BookLibrary lib;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("book directory '" + dir + "' not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".book") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      lib.add(parse_book(text::read_file(f.string())));
    } catch (const ParseError& e) {
      throw ParseError(e.line(), f.filename().string() + ": " + e.what());
    }
  }
  return lib;
}

void BookLibrary::add(Book book) {
  book.validate();
  if (books_.count(book.id)) throw ConfigError("duplicate book id '" + book.id + "'");
  auto id = book.id;
  books_.emplace(std::move(id), std::move(book));
}

const Book& BookLibrary::get(const std::string& id) const {
  auto it = books_.find(id);
  if (it == books_.end()) throw NotFoundError("no book '" + id + "'");
  return it->second;
}

std::vector<std::string> BookLibrary::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, b] : books_) out.push_back(id);
  return out;
}

void validate_student_id(const std::string& id) {
  const bool ok = !id.empty() && id.size() <= 64 &&
                  std::all_of(id.begin(), id.end(), [](char c) {
                    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
                  });
  if (!ok) throw ArgumentError("student ids use letters, digits, '_' and '-' only");
}

GateStore::GateStore(std::optional<std::string> dir) : dir_(std::move(dir)) {}

std::string GateStore::path_for(const std::string& student) const {
  return (fs::path(*dir_) / (student + ".gates")).string();
}

std::set<std::string>& GateStore::load(const std::string& student) const {
  auto it = cache_.find(student);
  if (it != cache_.end()) return it->second;
  std::set<std::string> books;
  if (dir_) {
    std::error_code ec;
    const auto p = path_for(student);
    if (fs::exists(p, ec)) {
      for (const auto& line : text::split_lines(text::read_file(p))) {
        auto t = text::tokenize(line);
        if (!t.empty()) books.insert(t[0]);
      }
    }
  }
  return cache_.emplace(student, std::move(books)).first->second;
}

void GateStore::record(const std::string& student, const std::string& book_id,
                       const QuizResult& result) {
  validate_student_id(student);
  std::lock_guard lock(mu_);
  auto& books = load(student);
  if (!result.gate_passed || !books.insert(book_id).second) return;
  if (!dir_) return;
  std::error_code ec;
  fs::create_directories(*dir_, ec);
  std::string out;
  for (const auto& b : books) out += b + "\n";
  text::write_file(path_for(student), out);
}

bool GateStore::passed(const std::string& student, const std::string& book_id) const {
  std::lock_guard lock(mu_);
  return load(student).count(book_id) > 0;
}

std::set<std::string> GateStore::passed_books(const std::string& student) const {
  std::lock_guard lock(mu_);
  return load(student);
}

}  // namespace blockpath
