"""
Curriculum pseudo-labels live for one epoch
===========================================

After each epoch, unknown labels with confident logits get a pseudo-label.
Those pseudo-labels are used during the next epoch only and then thrown
away, so a wrong guess cannot entrench itself.
"""
import numpy as np

from logicmix.curriculum import CurriculumConfig, compose_epoch_view, generate_pseudo_labels
from logicmix.trainer import TrainConfig, synthetic_task, train

codes = np.array([[1, -1, -1],
                  [-1, 0, -1]], dtype=np.int8)
logits = np.array([[5.0, 2.5, 0.3],
                   [-3.0, 9.0, 2.0]])
pseudo = generate_pseudo_labels(logits, codes, CurriculumConfig(2.0, -2.0), epoch=5)
print("pseudo-labels:", pseudo.to_records())
for epoch in (5, 6, 7):
    print(f"epoch {epoch} view:\n{compose_epoch_view(codes, pseudo, epoch).matrix()}")

# Inside training: how many unknowns get a pseudo-label after each epoch.
task = synthetic_task(n_train=2000, n_test=1000, known_proportion=0.3, seed=1)
result = train(task.train_features, task.train,
               TrainConfig(epochs=6, curriculum=CurriculumConfig(2.0, -2.0)))
unknown = int((task.train.labels == -1).sum())
print(f"{unknown} unknown labels; pseudo-labels per epoch: {result.pseudo_label_counts}")
