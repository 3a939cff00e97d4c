from .dataset import Dataset, class_centers, load_dataset, make_dataset, save_dataset
from .sgd import SGD, TrainConfig, TrainHistory, evaluate_accuracy, train
