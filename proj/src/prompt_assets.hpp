#pragma once

#include <string_view>

namespace krail::assets {

// Agent templates carry {{case_text}} and {{section_headers}} placeholders.
extern const std::string_view kTaskAnalysisTemplate;
extern const std::string_view kContextAnalysisTemplate;
extern const std::string_view kCognitiveActivitiesTemplate;
extern const std::string_view kTimeConstraintsTemplate;

extern const std::string_view kAttributeInstructions;
extern const std::string_view kAttributeOutputContract;

}  // namespace krail::assets
