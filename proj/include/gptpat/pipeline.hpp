#pragma once

#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <unordered_set>
#include <vector>

#include "gptpat/core.hpp"
#include "gptpat/gateway.hpp"

namespace gptpat {

struct PipelineConfig {
  std::string model_id = "gpt-3.5-turbo";
  double temperature = kDefaultTemperature;
  int parallelism = 1;
  bool resume = false;
  // The re-answer length budget is the whitespace word count of the text
  // under scrutiny by default; byte count is available as an alternative.
  enum class LenUnit { Words, Bytes } len_unit = LenUnit::Words;
};

// An Error that remembers which pipeline stage failed.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message) : Error(message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Chat completion for the question-generation prompt, whitespace-stripped.
std::string generate_question(const TextSample& sample, Gateway& gateway,
                              const PipelineConfig& config);

// Chat completion for the re-answer prompt.
std::string generate_reanswer(const std::string& question, std::size_t len, Gateway& gateway,
                              const PipelineConfig& config);

// Question generation followed by re-answering: two gateway calls per cold
// sample, none per warm one. All-or-nothing; a partial failure produces no
// record.
PairRecord create_pair(const TextSample& sample, Gateway& gateway, const PipelineConfig& config);

// Append-only pair store.
class PairSink {
 public:
  virtual ~PairSink() = default;
  virtual void append(const PairRecord& record) = 0;  // must accept concurrent calls
  virtual bool contains(const std::string& id) const = 0;
  virtual std::size_t size() const = 0;
};

// One JSON record per line, flushed per append so interrupted runs stay
// resumable. With load_existing the ids already in the file are skipped on
// the next batch_create(resume=true) run.
class JsonlPairSink : public PairSink {
 public:
  JsonlPairSink(std::filesystem::path path, bool load_existing);

  void append(const PairRecord& record) override;
  bool contains(const std::string& id) const override;
  std::size_t size() const override;

 private:
  std::filesystem::path path_;
  std::unordered_set<std::string> ids_;
  mutable std::mutex mutex_;
};

class MemoryPairSink : public PairSink {
 public:
  void append(const PairRecord& record) override;
  bool contains(const std::string& id) const override;
  std::size_t size() const override;
  std::vector<PairRecord> records() const;

 private:
  std::vector<PairRecord> records_;
  mutable std::mutex mutex_;
};

struct BatchFailure {
  std::string id;
  std::string stage;
  std::string error;
};

struct BatchSummary {
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;
  std::vector<BatchFailure> failures;
};

// Bounded-parallel fan-out over samples. Ids already present in the sink (or
// duplicated in the input) are skipped; individual failures are recorded and
// the batch continues. `cancelled`, when set, stops workers from picking up
// further samples; unprocessed ones count as skipped.
BatchSummary batch_create(const std::vector<TextSample>& samples, Gateway& gateway,
                          const PipelineConfig& config, PairSink& sink,
                          const std::function<bool()>& cancelled = {});

// JSON-Lines of {"id","stage","error"}.
void write_failures_jsonl(const std::filesystem::path& path,
                          const std::vector<BatchFailure>& failures);

}  // namespace gptpat
