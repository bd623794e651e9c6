#include "gptpat/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "internal/strings.hpp"
#include "internal/time.hpp"

namespace gptpat {

std::string generate_question(const TextSample& sample, Gateway& gateway,
                              const PipelineConfig& config) {
  if (sample.body.empty()) throw DataError("sample \"" + sample.id + "\" has an empty body");
  auto request = single_turn_request(config.model_id, render_qg_prompt(sample.body),
                                     config.temperature, "qg:" + sample.id);
  std::string question = internal::trim(gateway.complete(request));
  if (question.empty())
    throw DataError("empty question completion for sample \"" + sample.id + "\"");
  return question;
}

std::string generate_reanswer(const std::string& question, std::size_t len, Gateway& gateway,
                              const PipelineConfig& config) {
  auto request = single_turn_request(config.model_id, render_reanswer_prompt(question, len),
                                     config.temperature);
  return gateway.complete(request);
}

PairRecord create_pair(const TextSample& sample, Gateway& gateway, const PipelineConfig& config) {
  if (sample.body.empty()) throw StageError("validate", "sample \"" + sample.id + "\" has an empty body");
  std::size_t len = config.len_unit == PipelineConfig::LenUnit::Words ? sample.word_count
                                                                      : sample.body.size();
  if (len == 0)
    throw StageError("validate", "sample \"" + sample.id + "\" has no words to answer in");

  std::string question;
  try {
    question = generate_question(sample, gateway, config);
  } catch (const std::exception& ex) {
    throw StageError("question", ex.what());
  }

  std::string re_answer;
  try {
    re_answer = generate_reanswer(question, len, gateway, config);
  } catch (const std::exception& ex) {
    throw StageError("reanswer", ex.what());
  }

  PairRecord record;
  record.original = sample;
  record.generated_question = std::move(question);
  record.re_answer = std::move(re_answer);
  record.model_id = config.model_id;
  record.temperature = config.temperature;
  record.created_at = internal::iso8601_utc_now();
  return record;
}

JsonlPairSink::JsonlPairSink(std::filesystem::path path, bool load_existing)
    : path_(std::move(path)) {
  if (load_existing && std::filesystem::exists(path_)) {
    for (const auto& record : read_pairs_jsonl(path_)) ids_.insert(record.original.id);
  } else {
    std::ofstream truncate(path_, std::ios::trunc);
    if (!truncate) throw DataError("cannot open sink " + path_.string());
  }
}

void JsonlPairSink::append(const PairRecord& record) {
  std::string line = to_json(record).dump();
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::app);
  if (!out) throw DataError("cannot append to sink " + path_.string());
  out << line << '\n';
  out.flush();
  ids_.insert(record.original.id);
}

bool JsonlPairSink::contains(const std::string& id) const {
  std::lock_guard lock(mutex_);
  return ids_.count(id) > 0;
}

std::size_t JsonlPairSink::size() const {
  std::lock_guard lock(mutex_);
  return ids_.size();
}

void MemoryPairSink::append(const PairRecord& record) {
  std::lock_guard lock(mutex_);
  records_.push_back(record);
}

bool MemoryPairSink::contains(const std::string& id) const {
  std::lock_guard lock(mutex_);
  return std::any_of(records_.begin(), records_.end(),
                     [&](const PairRecord& r) { return r.original.id == id; });
}

std::size_t MemoryPairSink::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

std::vector<PairRecord> MemoryPairSink::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

BatchSummary batch_create(const std::vector<TextSample>& samples, Gateway& gateway,
                          const PipelineConfig& config, PairSink& sink,
                          const std::function<bool()>& cancelled) {
  if (config.parallelism < 1) throw ConfigError("parallelism must be at least 1");

  BatchSummary summary;
  std::atomic<std::size_t> next{0};
  std::mutex state_mutex;
  std::unordered_set<std::string> claimed;

  auto worker = [&] {
    for (;;) {
      if (cancelled && cancelled()) return;
      std::size_t i = next.fetch_add(1);
      if (i >= samples.size()) return;
      const TextSample& sample = samples[i];

      {
        std::lock_guard lock(state_mutex);
        // Dedup by id: previously sunk (resume) or claimed by another worker.
        // Skipped samples are tallied after the workers join.
        if (sink.contains(sample.id) || !claimed.insert(sample.id).second) continue;
      }

      try {
        PairRecord record = create_pair(sample, gateway, config);
        try {
          sink.append(record);
        } catch (const std::exception& ex) {
          throw StageError("sink", ex.what());
        }
        std::lock_guard lock(state_mutex);
        ++summary.succeeded;
      } catch (const StageError& ex) {
        std::lock_guard lock(state_mutex);
        ++summary.failed;
        summary.failures.push_back({sample.id, ex.stage(), ex.what()});
      } catch (const std::exception& ex) {
        std::lock_guard lock(state_mutex);
        ++summary.failed;
        summary.failures.push_back({sample.id, "pipeline", ex.what()});
      }
    }
  };

  std::size_t thread_count =
      std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), std::max<std::size_t>(samples.size(), 1));
  std::vector<std::thread> threads;
  threads.reserve(thread_count);
  for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);
  for (auto& thread : threads) thread.join();

  // Anything not processed (cancellation) counts as skipped: it stays
  // resumable.
  summary.skipped = samples.size() - summary.succeeded - summary.failed;
  return summary;
}

void write_failures_jsonl(const std::filesystem::path& path,
                          const std::vector<BatchFailure>& failures) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& failure : failures) {
    out << nlohmann::json{{"id", failure.id}, {"stage", failure.stage}, {"error", failure.error}}
               .dump()
        << '\n';
  }
}

}  // namespace gptpat
