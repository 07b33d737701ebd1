#include "lait/pipeline.hpp"

#include "lait/task.hpp"

namespace lait {

SegmentedExample make_example(const std::string& task_id,
                              const std::map<std::string, std::string>& fields,
                              const std::optional<std::string>& label, const ModelConfig& cfg) {
    const TaskTemplate& tmpl = find_task(task_id);
    SegmentedExample ex;
    ex.task_id = task_id;
    ex.label = label;
    ex.segment_texts = apply_template(tmpl, fields);
    ex.segments.reserve(ex.segment_texts.size());
    for (const auto& text : ex.segment_texts) ex.segments.push_back(tokenize(text, cfg));
    ex.validate();
    return ex;
}

SegmentedExample make_raw_example(const std::vector<std::string>& segment_texts,
                                  const std::optional<std::string>& label,
                                  const ModelConfig& cfg) {
    if (segment_texts.empty()) throw InputError("raw example has no segments");
    SegmentedExample ex;
    ex.task_id = "raw";
    ex.label = label;
    ex.segment_texts = segment_texts;
    ex.segments.reserve(segment_texts.size());
    for (const auto& text : segment_texts) ex.segments.push_back(tokenize(text, cfg));
    ex.validate();
    return ex;
}

}  // namespace lait
