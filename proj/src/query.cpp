#include "marx/query.hpp"

#include <cctype>
#include <optional>
#include <set>

#include "marx/error.hpp"

namespace marx {
namespace {

constexpr const char* kModule = "querylang";

struct Token {
  std::string_view text;
  std::size_t offset;
};

struct RawItem {
  Token task;
  std::vector<Token> agents;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  std::vector<RawItem> parse() {
    std::vector<RawItem> items;
    skip_ws();
    if (at_end()) return items;
    items.push_back(item());
    skip_ws();
    while (!at_end()) {
      expect("->");
      items.push_back(item());
      skip_ws();
    }
    return items;
  }

 private:
  RawItem item() {
    RawItem it;
    it.task = identifier("task name");
    expect(":");
    it.agents.push_back(identifier("agent"));
    skip_ws();
    while (!at_end() && text_[pos_] == ',') {
      ++pos_;
      it.agents.push_back(identifier("agent"));
      skip_ws();
    }
    return it;
  }

  Token identifier(const char* what) {
    skip_ws();
    std::size_t start = pos_;
    if (at_end() || !(std::isalpha(uc(text_[pos_])) || text_[pos_] == '_')) {
      error(std::string("expected ") + what);
    }
    while (!at_end() && (std::isalnum(uc(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    return Token{text_.substr(start, pos_ - start), start};
  }

  void expect(std::string_view lit) {
    skip_ws();
    if (text_.substr(pos_, lit.size()) != lit) error("expected '" + std::string(lit) + "'");
    pos_ += lit.size();
  }

  void skip_ws() {
    while (!at_end() && std::isspace(uc(text_[pos_]))) ++pos_;
  }

  bool at_end() const { return pos_ >= text_.size(); }
  static unsigned char uc(char c) { return static_cast<unsigned char>(c); }

  [[noreturn]] void error(const std::string& what) const {
    std::string found = at_end() ? "end of input" : "'" + std::string(1, text_[pos_]) + "'";
    throw Error(ErrorCode::ParseError, kModule,
                what + " at offset " + std::to_string(pos_) + ", found " + found, pos_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t TemporalQuery::position_of(TaskId task) const {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].task == task) return i;
  }
  return static_cast<std::size_t>(-1);
}

TemporalQuery parse_query(std::string_view text, const EnvConfig& env) {
  std::vector<RawItem> raw = Parser(text).parse();
  TemporalQuery q;
  for (const RawItem& r : raw) {
    auto task = env.task_index(r.task.text);
    if (!task) {
      throw Error(ErrorCode::UnknownTask, kModule, "unknown task '" + std::string(r.task.text) + "'", r.task.offset);
    }
    QueryItem item{*task, {}};
    for (const Token& a : r.agents) {
      auto agent = env.agent_index(a.text);
      if (!agent) {
        throw Error(ErrorCode::UnknownAgent, kModule, "unknown agent '" + std::string(a.text) + "'", a.offset);
      }
      item.coalition.insert(*agent);
    }
    q.items.push_back(item);
  }
  return q;
}

std::string render(const TemporalQuery& query, const EnvConfig& env) {
  std::string out;
  for (std::size_t i = 0; i < query.items.size(); ++i) {
    const QueryItem& it = query.items[i];
    if (i > 0) out += " -> ";
    out += env.tasks.at(static_cast<std::size_t>(it.task)).name;
    out += ':';
    bool first = true;
    for (AgentId a : it.coalition.members()) {
      if (!first) out += ',';
      out += env.agent_token(a);
      first = false;
    }
  }
  return out;
}

std::string atom_name(TaskId task, Coalition coalition, const EnvConfig& env) {
  std::string out = env.tasks.at(static_cast<std::size_t>(task)).name;
  for (AgentId a : coalition.members()) out += "_" + env.agent_atom(a);
  return out;
}

std::vector<Violation> validate(const TemporalQuery& query, const EnvConfig& env) {
  std::vector<Violation> out;
  std::set<TaskId> seen;
  for (std::size_t i = 0; i < query.items.size(); ++i) {
    const QueryItem& it = query.items[i];
    if (it.task < 0 || it.task >= env.num_tasks()) {
      out.push_back({ViolationKind::UnknownTask, i, it.task, "item " + std::to_string(i + 1) + " names an unknown task"});
      continue;
    }
    const std::string& name = env.tasks[static_cast<std::size_t>(it.task)].name;
    if (!seen.insert(it.task).second) {
      out.push_back({ViolationKind::DuplicateTask, i, it.task, "task '" + name + "' appears more than once"});
    }
    if (it.coalition.empty()) {
      out.push_back({ViolationKind::EmptyCoalition, i, it.task, "task '" + name + "' has no agents"});
    } else if (it.coalition.extent() > env.numAgents) {
      out.push_back({ViolationKind::AgentOutOfRange, i, it.task, "task '" + name + "' names an agent outside 1.." + std::to_string(env.numAgents)});
    }
  }
  return out;
}

void require_valid(const TemporalQuery& query, const EnvConfig& env) {
  auto violations = validate(query, env);
  if (!violations.empty()) throw Error(ErrorCode::InvalidQuery, kModule, violations.front().message);
}

std::string to_pctl(const TemporalQuery& query, const EnvConfig& env) {
  if (query.empty()) return "P>0 [ true ]";
  std::string body;
  for (std::size_t i = query.items.size(); i-- > 0;) {
    const QueryItem& it = query.items[i];
    std::string atom = atom_name(it.task, it.coalition, env);
    body = body.empty() ? "F (" + atom + ")" : "F (" + atom + " & " + body + ")";
  }
  return "P>0 [ " + body + " ]";
}

}  // namespace marx
