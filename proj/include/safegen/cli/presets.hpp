#pragma once

// Built-in configurations. Desk presets finish in minutes on one core; paper
// presets follow the published experiment sizes and may take hours.

namespace safegen::cli {

inline constexpr const char* kDeskPreset = R"(
[run]
seed = 0

[synth]
system = scalar
a = 0.5
b = 1
d = 1
r = 1
tasks = 0.1
random_tasks = 0
hinf = true
rel_tol = 1e-4

[check]
system = commuting
dim = 4
normA = 0.3
normB = 0.5
normD = 1
normRinv = 1
alpha = 0.9

[figure1]
modes = met,violated
dims = 4
rel_tol = 1e-4
met.normA = 0.05,0.1,0.15,0.2,0.25,0.3
met.normB = 0.5
met.normD = 1
met.normRinv = 1
met.alpha = 0.9
met.seeds = 3
met.tasks_per_batch = 134
violated.normA = 0.1,0.4,0.7
violated.normB = 0.3,0.6,0.9
violated.normRinv = 1,2
violated.seeds = 2
violated.tasks_per_batch = 67

[table1]
dim = 4
regimes = infinite,finite
teachers = safe,unsafe
seeds = 5
control = false
width = 256
depth = 3
lr = 1e-3
plateau_factor = 0.1
plateau_patience = 30
min_lr = 1e-9
eval_every = 25
loss_floor = 1e-5
rel_tol = 1e-4
checkpoints = false
infinite.tasks = 800
infinite.max_epochs = 3000
infinite.batch = 256
finite.tasks = 160
finite.max_epochs = 300
finite.batch = 256
)";

inline constexpr const char* kPaperPreset = R"(
[run]
seed = 0

[synth]
system = scalar
a = 0.5
b = 1
d = 1
r = 1
tasks = 0.1
random_tasks = 0
hinf = true
rel_tol = 1e-4

[check]
system = commuting
dim = 4
normA = 0.4
normB = 0.5
normD = 1
normRinv = 1
alpha = 0.9

[figure1]
modes = met,violated
dims = 4,8
rel_tol = 1e-4
met.normA = 0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4
met.normB = 0.5
met.normD = 1
met.normRinv = 1
met.alpha = 0.9
met.seeds = 5
met.tasks_per_batch = auto
violated.normA = 0.1,0.4,0.7
violated.normB = 0.3,0.6,0.9
violated.normRinv = 1,2
violated.seeds = 5
violated.tasks_per_batch = auto

[table1]
dim = 10
regimes = infinite,finite
teachers = safe,unsafe
seeds = 5
control = false
width = 2048
depth = 3
lr = 1e-5
plateau_factor = 0.1
plateau_patience = 30
min_lr = 1e-9
eval_every = 25
loss_floor = 1e-5
rel_tol = 1e-4
checkpoints = true
infinite.tasks = 80000
infinite.max_epochs = 10000
infinite.batch = 256
finite.tasks = 1000
finite.max_epochs = 2000
finite.batch = 256
)";

}  // namespace safegen::cli
