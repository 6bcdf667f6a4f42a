#include "prompt_assets.hpp"

namespace krail::assets {

const std::string_view kTaskAnalysisTemplate = R"(You are the task analysis agent in a human reliability analysis team.
Read the data source below and identify the tasks associated with the reported human error information.
Give a task overview outlining the general process, classify the task by function or type, state the
objectives of the task, examine typical error types and their impacts, and determine the task complexity
level (simple to highly complex).

DATA SOURCE:
{{case_text}}

Answer with exactly the following section headers, each at the start of its own line and followed by
the section content:
{{section_headers}}
)";

const std::string_view kContextAnalysisTemplate = R"(You are the context analysis agent in a human reliability analysis team.
Read the data source below and analyze the context of task execution. Identify the background
conditions under which the task occurs, the support required for task execution, the initial
conditions and requirements for task initiation, and the error measurement data describing
task-related performance and outcomes.

DATA SOURCE:
{{case_text}}

Answer with exactly the following section headers, each at the start of its own line and followed by
the section content:
{{section_headers}}
)";

const std::string_view kCognitiveActivitiesTemplate = R"(You are the cognitive activities agent in a human reliability analysis team.
Read the data source below and characterize the specific cognitive activities involved in the task,
the cognitive demands of task execution and the mental processes underlying task performance.

DATA SOURCE:
{{case_text}}

Answer with exactly the following section headers, each at the start of its own line and followed by
the section content:
{{section_headers}}
)";

const std::string_view kTimeConstraintsTemplate = R"(You are the time constraints agent in a human reliability analysis team.
Read the data source below and evaluate the time constraints on task execution: temporal limitations,
deadlines, and time-sensitive conditions that affect task performance and outcomes.

DATA SOURCE:
{{case_text}}

Answer with exactly the following section headers, each at the start of its own line and followed by
the section content:
{{section_headers}}
)";

const std::string_view kAttributeInstructions = R"(You are assisting a human reliability analyst who estimates the base human error probability of a task.
Using the knowledge graph context, the worked examples and the task decomposition below, propose the
attributes that index the matching data row: PIF, CFM, task (and error measure), PIF measure, and
other PIFs (and uncertainty). Give up to five candidates per attribute, best first.)";

const std::string_view kAttributeOutputContract = R"(Reply with exactly five blocks, one per attribute, in this order. Start each block with its header
line and list between one and five candidates, one per line, each prefixed with RANK n: where n starts
at 1 and increases. Do not repeat a candidate within a block.

PIF:
RANK 1: <PIF code such as SF4 or SF3.3>
CFM:
RANK 1: <one or more of D, U, DM, E, T separated by |>
TASK_AND_ERROR_MEASURE:
RANK 1: <task description with error measure>
PIF_MEASURE:
RANK 1: <PIF measure>
OTHER_PIFS_AND_UNCERTAINTY:
RANK 1: <other PIFs and uncertainty>)";

}  // namespace krail::assets
