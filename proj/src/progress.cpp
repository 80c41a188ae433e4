#include "marx/progress.hpp"

#include "marx/error.hpp"

namespace marx {

ProgressMatrix::ProgressMatrix(int agents, int tasks, std::uint64_t bits)
    : agents_(agents), tasks_(tasks), bits_(bits) {
  if (agents < 0 || tasks < 0 || agents * tasks > 64) {
    throw Error(ErrorCode::InvalidArgument, "abstraction", "progress matrix larger than 64 bits");
  }
  if (agents * tasks < 64 && (bits >> (agents * tasks)) != 0) {
    throw Error(ErrorCode::InvalidArgument, "abstraction", "progress bits outside matrix");
  }
}

Coalition ProgressMatrix::completers(TaskId g) const {
  Coalition c;
  for (AgentId a = 0; a < agents_; ++a) {
    if (bit(a, g)) c.insert(a);
  }
  return c;
}

bool ProgressMatrix::all_done() const {
  for (TaskId g = 0; g < tasks_; ++g) {
    if (!task_done(g)) return false;
  }
  return true;
}

ProgressMatrix ProgressMatrix::with(const EventSet& events) const {
  ProgressMatrix out = *this;
  for (const CompletionEvent& e : events) {
    for (AgentId a : e.coalition.members()) out.set(a, e.task);
  }
  return out;
}

std::string ProgressMatrix::to_string() const {
  std::string out(static_cast<std::size_t>(width()), '0');
  for (int v = 0; v < width(); ++v) {
    if ((bits_ >> v) & 1U) out[static_cast<std::size_t>(v)] = '1';
  }
  return out;
}

ProgressMatrix ProgressMatrix::from_string(int agents, int tasks, std::string_view bits) {
  if (static_cast<int>(bits.size()) != agents * tasks) {
    throw Error(ErrorCode::MalformedFile, "abstraction",
                "progress bit string '" + std::string(bits) + "' has wrong length");
  }
  std::uint64_t word = 0;
  for (std::size_t v = 0; v < bits.size(); ++v) {
    if (bits[v] == '1') {
      word |= std::uint64_t{1} << v;
    } else if (bits[v] != '0') {
      throw Error(ErrorCode::MalformedFile, "abstraction", "progress bit string must be 0/1");
    }
  }
  return ProgressMatrix(agents, tasks, word);
}

EventSet events_of(const ProgressMatrix& source, const ProgressMatrix& target) {
  if (source.agents() != target.agents() || source.tasks() != target.tasks()) {
    throw Error(ErrorCode::InvalidArgument, "abstraction", "progress matrices differ in shape");
  }
  if (!source.below(target)) {
    throw Error(ErrorCode::NonMonotone, "abstraction",
                "transition " + source.to_string() + " -> " + target.to_string() + " clears a completed task");
  }
  EventSet events;
  for (TaskId g = 0; g < source.tasks(); ++g) {
    Coalition added = target.completers(g).minus(source.completers(g));
    if (!added.empty()) events.push_back(CompletionEvent{g, added});
  }
  return events;
}

}  // namespace marx
